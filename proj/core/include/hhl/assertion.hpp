// Quantifier-free assertions over terms, their satisfaction semantics and the
// recursive open/closed classification.
#pragma once

#include "hhl/term.hpp"

namespace hhl {

enum class CmpOp : std::uint8_t { Eq, Le, Lt, Ne };
enum class AssertKind : std::uint8_t { True, Cmp, And, Or, Not, Implies };

struct AssertNode;
using Assertion = std::shared_ptr<const AssertNode>;

struct AssertNode {
    AssertKind kind;
    CmpOp op = CmpOp::Eq;  // Cmp payload
    Term lhs, rhs;         // Cmp payload
    Assertion a, b;        // children

    mutable std::size_t hash_cache = 0;
};

Assertion atrue();
Assertion cmp(CmpOp op, Term l, Term r);
Assertion aand(Assertion a, Assertion b);
Assertion aor(Assertion a, Assertion b);
Assertion anot(Assertion a);
Assertion implies(Assertion a, Assertion b);

inline Assertion eq(Term l, Term r) { return cmp(CmpOp::Eq, std::move(l), std::move(r)); }
inline Assertion le(Term l, Term r) { return cmp(CmpOp::Le, std::move(l), std::move(r)); }
inline Assertion lt(Term l, Term r) { return cmp(CmpOp::Lt, std::move(l), std::move(r)); }
inline Assertion ne(Term l, Term r) { return cmp(CmpOp::Ne, std::move(l), std::move(r)); }
inline Assertion ge(Term l, Term r) { return le(std::move(r), std::move(l)); }
inline Assertion gt(Term l, Term r) { return lt(std::move(r), std::move(l)); }

// Conjunction of a list; empty list is true.
Assertion aand_all(const std::vector<Assertion>& xs);
Assertion aor_all(const std::vector<Assertion>& xs);

bool satisfies(const Store& store, const Assertion& a);

// exact-rational satisfaction; immune to double cancellation noise
bool satisfies_exact(const Store& store, const Assertion& a);

enum class Openness : std::uint8_t { Open, Closed, Both, Neither };
Openness classify(const Assertion& a);
inline bool is_open(const Assertion& a) {
    Openness o = classify(a);
    return o == Openness::Open || o == Openness::Both;
}

Assertion subst(const Assertion& a, VarId x, const Term& replacement);

std::size_t assertion_hash(const Assertion& a);
bool assertion_eq(const Assertion& a, const Assertion& b);

void collect_vars(const Assertion& a, std::vector<VarId>& out);

std::string to_string(const Assertion& a, const Vocabulary& vocab);

}  // namespace hhl
