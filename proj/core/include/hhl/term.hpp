// Terms of the assertion language: rational-coefficient polynomials over
// named variables, extended with max and a guarded-selection node so that
// derivatives of max-terms stay representable.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hhl {

using Rational = boost::multiprecision::cpp_rational;

using VarId = std::uint32_t;

// Interning table for variable names. One vocabulary is shared by all terms,
// stores and programs of a scenario.
class Vocabulary {
public:
    VarId intern(const std::string& name) {
        auto it = ids_.find(name);
        if (it != ids_.end()) return it->second;
        VarId id = static_cast<VarId>(names_.size());
        names_.push_back(name);
        ids_.emplace(name, id);
        return id;
    }
    const std::string& name(VarId id) const { return names_.at(id); }
    bool contains(const std::string& name) const { return ids_.count(name) > 0; }
    VarId id(const std::string& name) const {
        auto it = ids_.find(name);
        if (it == ids_.end()) throw std::out_of_range("unknown variable: " + name);
        return it->second;
    }
    std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, VarId> ids_;
};

using VocabPtr = std::shared_ptr<Vocabulary>;

struct UndeclaredVariable : std::runtime_error {
    explicit UndeclaredVariable(const std::string& what) : std::runtime_error(what) {}
};

// Total map from declared variables to values. Undefined slots are tracked so
// evaluation of a term over a partial store is an error, not a NaN.
class Store {
public:
    Store() = default;
    explicit Store(VocabPtr vocab)
        : vocab_(std::move(vocab)), vals_(vocab_->size(), 0.0), def_(vocab_->size(), false) {}

    const VocabPtr& vocab() const { return vocab_; }

    void set(VarId id, double v) {
        grow(id);
        vals_[id] = v;
        def_[id] = true;
    }
    void set(const std::string& name, double v) { set(vocab_->intern(name), v); }

    double get(VarId id) const {
        if (id >= vals_.size() || !def_[id])
            throw UndeclaredVariable("variable not defined in store: " +
                                     (vocab_ && id < vocab_->size() ? vocab_->name(id) : std::to_string(id)));
        return vals_[id];
    }
    double get(const std::string& name) const { return get(vocab_->id(name)); }
    bool defined(VarId id) const { return id < vals_.size() && def_[id]; }

    bool operator==(const Store& o) const { return vals_ == o.vals_ && def_ == o.def_; }

private:
    void grow(VarId id) {
        if (id >= vals_.size()) {
            vals_.resize(id + 1, 0.0);
            def_.resize(id + 1, false);
        }
    }
    VocabPtr vocab_;
    std::vector<double> vals_;
    std::vector<bool> def_;
};

enum class TermKind : std::uint8_t { Num, Var, Add, Sub, Mul, DivConst, Max, Sel };

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

// Sel(a, b, t, u) evaluates t when a >= b and u otherwise. It only arises as
// the derivative of Max and keeps piecewise derivatives first-class.
struct TermNode {
    TermKind kind;
    Rational num;        // Num payload, or DivConst divisor
    VarId var = 0;       // Var payload
    Term a, b, c, d;     // children: binary ops use a,b; Sel uses a,b,c,d

    mutable std::size_t hash_cache = 0;
};

Term num(Rational q);
Term num(long long n);
Term num(long long num, long long den);
Term var(VarId v);
Term add(Term a, Term b);
Term sub(Term a, Term b);
Term mul(Term a, Term b);
Term div_const(Term a, Rational q);
Term tmax(Term a, Term b);
Term sel(Term a, Term b, Term then_t, Term else_t);

inline Term operator+(Term a, Term b) { return add(std::move(a), std::move(b)); }
inline Term operator-(Term a, Term b) { return sub(std::move(a), std::move(b)); }
inline Term operator*(Term a, Term b) { return mul(std::move(a), std::move(b)); }
inline Term operator/(Term a, const Rational& q) { return div_const(std::move(a), q); }
inline Term operator-(Term a) { return sub(num(0), std::move(a)); }

double eval(const Term& t, const Store& store);

// Exact evaluation; store doubles are converted to rationals exactly. Used by
// tests that need bit-stable oracles.
Rational eval_exact(const Term& t, const Store& store);

std::size_t term_hash(const Term& t);
bool term_eq(const Term& a, const Term& b);

// Capture-free syntactic substitution (terms bind nothing).
Term subst(const Term& t, VarId x, const Term& replacement);

void collect_vars(const Term& t, std::vector<VarId>& out);

std::string to_string(const Term& t, const Vocabulary& vocab);

// d t / d x. The Max case selects the first argument's derivative on ties.
Term partial_derivative(const Term& t, VarId x);

// An ODE system: distinct variables with their right-hand-side terms.
// Variables not listed are constant under the flow.
struct Dynamics {
    std::vector<std::pair<VarId, Term>> odes;

    const Term* rhs(VarId v) const {
        for (auto& [x, f] : odes)
            if (x == v) return &f;
        return nullptr;
    }
};

// Sum over the dynamics of (d t / d x_i) * f_i.
Term lie_derivative(const Term& t, const Dynamics& d);

}  // namespace hhl
