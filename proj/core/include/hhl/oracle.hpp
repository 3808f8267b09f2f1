// Bounded-box validity oracle: falsify by search, certify by contraction and
// interval subdivision, or report Unknown.
#pragma once

#include "hhl/interval.hpp"
#include "hhl/poly.hpp"

#include <optional>
#include <random>
#include <variant>

namespace hhl {

struct OracleConfig {
    Box box;
    int max_depth = 14;
    int falsify_budget = 40000;    // sampled points
    std::uint64_t seed = 20220915;
    int witness_probes = 3;        // samples per leaf during certification
};

struct VerdictValid {
    int depth = 0;
};
struct VerdictFalsified {
    Store store;
};
struct VerdictUnknown {
    std::string reason;
};
using Verdict = std::variant<VerdictValid, VerdictFalsified, VerdictUnknown>;

inline bool is_valid(const Verdict& v) { return std::holds_alternative<VerdictValid>(v); }
inline bool is_falsified(const Verdict& v) { return std::holds_alternative<VerdictFalsified>(v); }

class ArithOracle {
public:
    ArithOracle(VocabPtr vocab, OracleConfig cfg) : vocab_(std::move(vocab)), cfg_(std::move(cfg)) {}

    const OracleConfig& config() const { return cfg_; }
    const VocabPtr& vocab() const { return vocab_; }

    // searches box for a store violating `a`; the result is re-checked with
    // plain evaluation before being returned
    std::optional<Store> falsify(const Assertion& a) const;
    std::optional<Store> falsify(const Assertion& a, int budget) const;

    // subdivision proof that `a` holds everywhere on the box
    std::optional<int> certify(const Assertion& a) const;
    std::optional<int> certify(const Assertion& a, int max_depth) const;

    Verdict decide(const Assertion& a) const;

private:
    VocabPtr vocab_;
    OracleConfig cfg_;
};

}  // namespace hhl
