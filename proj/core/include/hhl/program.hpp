// Hybrid programs: imperative constructs plus the differential-while loop
// that follows an ODE system until its open guard is falsified.
#pragma once

#include "hhl/assertion.hpp"

namespace hhl {

enum class ProgKind : std::uint8_t { Skip, Seq, Assign, If, While, DWhile, Case, Hole };

struct ProgNode;
using Program = std::shared_ptr<const ProgNode>;

struct ProgNode {
    ProgKind kind;
    Program a, b;        // Seq children; If branches; While body in a
    Assertion guard;     // If / While / DWhile
    VarId var = 0;       // Assign target
    Term rhs;            // Assign value
    Dynamics dyn;        // DWhile
    std::vector<std::pair<Assertion, Program>> cases;
    std::string hole;    // named syntactic parameter
};

Program pskip();
Program pseq(Program a, Program b);
Program pseq(std::vector<Program> xs);
Program passign(VarId x, Term e);
Program pif(Assertion g, Program then_p, Program else_p);
Program pwhile(Assertion g, Program body);
// guard must classify as open
Program pdwhile(Assertion g, Dynamics d);
Program pcase(std::vector<std::pair<Assertion, Program>> cases);
Program phole(std::string name);

bool has_holes(const Program& p);
bool program_eq(const Program& a, const Program& b);

// case blocks expand to nested conditionals with a final skip
Program expand_cases(const Program& p);

std::string to_string(const Program& p, const Vocabulary& vocab, int indent = 0);

struct GuardNotOpen : std::runtime_error {
    explicit GuardNotOpen(const std::string& w) : std::runtime_error(w) {}
};

}  // namespace hhl
