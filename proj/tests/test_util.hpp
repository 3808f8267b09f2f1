// Shared helpers for the unit tests: random term/assertion generators and a
// handful of small evaluation oracles kept independent of the library paths
// they are used to check.
#pragma once

#include "hhl/assertion.hpp"

#include <random>

namespace hhl::testutil {

struct Gen {
    VocabPtr vocab;
    std::vector<VarId> vars;
    std::mt19937_64 rng;

    explicit Gen(std::uint64_t seed, int nvars = 4) : vocab(std::make_shared<Vocabulary>()), rng(seed) {
        for (int i = 0; i < nvars; ++i) vars.push_back(vocab->intern("x" + std::to_string(i)));
    }

    int pick(int n) { return static_cast<int>(rng() % n); }
    double real(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(rng);
    }

    Term term(int depth) {
        if (depth <= 0 || pick(3) == 0) {
            if (pick(2) == 0) return num(pick(21) - 10, 1 + pick(4));
            return var(vars[pick(static_cast<int>(vars.size()))]);
        }
        switch (pick(6)) {
            case 0: return add(term(depth - 1), term(depth - 1));
            case 1: return sub(term(depth - 1), term(depth - 1));
            case 2: return mul(term(depth - 1), term(depth - 1));
            case 3: return div_const(term(depth - 1), Rational(1 + pick(7), 1 + pick(3)));
            case 4: return tmax(term(depth - 1), term(depth - 1));
            default: return sel(term(depth - 1), term(depth - 1), term(depth - 1), term(depth - 1));
        }
    }

    Assertion assertion(int depth) {
        if (depth <= 0 || pick(4) == 0) {
            switch (pick(5)) {
                case 0: return atrue();
                case 1: return eq(term(1), term(1));
                case 2: return le(term(1), term(1));
                case 3: return lt(term(1), term(1));
                default: return ne(term(1), term(1));
            }
        }
        switch (pick(4)) {
            case 0: return aand(assertion(depth - 1), assertion(depth - 1));
            case 1: return aor(assertion(depth - 1), assertion(depth - 1));
            case 2: return anot(assertion(depth - 1));
            default: return implies(assertion(depth - 1), assertion(depth - 1));
        }
    }

    Store store(double lo = -8, double hi = 8) {
        Store s(vocab);
        for (VarId v : vars) s.set(v, real(lo, hi));
        return s;
    }
};

}  // namespace hhl::testutil
