#include "hhl/program.hpp"

#include <sstream>

namespace hhl {

namespace {
Program make(ProgNode n) { return std::make_shared<const ProgNode>(std::move(n)); }
}  // namespace

Program pskip() {
    ProgNode n;
    n.kind = ProgKind::Skip;
    return make(std::move(n));
}

Program pseq(Program a, Program b) {
    ProgNode n;
    n.kind = ProgKind::Seq;
    n.a = std::move(a);
    n.b = std::move(b);
    return make(std::move(n));
}

Program pseq(std::vector<Program> xs) {
    if (xs.empty()) return pskip();
    Program p = xs.back();
    for (auto it = xs.rbegin() + 1; it != xs.rend(); ++it) p = pseq(*it, p);
    return p;
}

Program passign(VarId x, Term e) {
    ProgNode n;
    n.kind = ProgKind::Assign;
    n.var = x;
    n.rhs = std::move(e);
    return make(std::move(n));
}

Program pif(Assertion g, Program then_p, Program else_p) {
    ProgNode n;
    n.kind = ProgKind::If;
    n.guard = std::move(g);
    n.a = std::move(then_p);
    n.b = std::move(else_p);
    return make(std::move(n));
}

Program pwhile(Assertion g, Program body) {
    ProgNode n;
    n.kind = ProgKind::While;
    n.guard = std::move(g);
    n.a = std::move(body);
    return make(std::move(n));
}

Program pdwhile(Assertion g, Dynamics d) {
    if (!is_open(g)) throw GuardNotOpen("dwhile guard must be an open assertion");
    ProgNode n;
    n.kind = ProgKind::DWhile;
    n.guard = std::move(g);
    n.dyn = std::move(d);
    return make(std::move(n));
}

Program pcase(std::vector<std::pair<Assertion, Program>> cases) {
    ProgNode n;
    n.kind = ProgKind::Case;
    n.cases = std::move(cases);
    return make(std::move(n));
}

Program phole(std::string name) {
    ProgNode n;
    n.kind = ProgKind::Hole;
    n.hole = std::move(name);
    return make(std::move(n));
}

bool has_holes(const Program& p) {
    switch (p->kind) {
        case ProgKind::Skip:
        case ProgKind::Assign:
        case ProgKind::DWhile: return false;
        case ProgKind::Hole: return true;
        case ProgKind::Seq:
        case ProgKind::If: return has_holes(p->a) || has_holes(p->b);
        case ProgKind::While: return has_holes(p->a);
        case ProgKind::Case:
            for (auto& [g, q] : p->cases)
                if (has_holes(q)) return true;
            return false;
    }
    return false;
}

bool program_eq(const Program& a, const Program& b) {
    if (a.get() == b.get()) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ProgKind::Skip: return true;
        case ProgKind::Hole: return a->hole == b->hole;
        case ProgKind::Assign: return a->var == b->var && term_eq(a->rhs, b->rhs);
        case ProgKind::Seq: return program_eq(a->a, b->a) && program_eq(a->b, b->b);
        case ProgKind::If:
            return assertion_eq(a->guard, b->guard) && program_eq(a->a, b->a) &&
                   program_eq(a->b, b->b);
        case ProgKind::While: return assertion_eq(a->guard, b->guard) && program_eq(a->a, b->a);
        case ProgKind::DWhile: {
            if (!assertion_eq(a->guard, b->guard)) return false;
            if (a->dyn.odes.size() != b->dyn.odes.size()) return false;
            for (std::size_t i = 0; i < a->dyn.odes.size(); ++i) {
                if (a->dyn.odes[i].first != b->dyn.odes[i].first) return false;
                if (!term_eq(a->dyn.odes[i].second, b->dyn.odes[i].second)) return false;
            }
            return true;
        }
        case ProgKind::Case: {
            if (a->cases.size() != b->cases.size()) return false;
            for (std::size_t i = 0; i < a->cases.size(); ++i) {
                if (!assertion_eq(a->cases[i].first, b->cases[i].first)) return false;
                if (!program_eq(a->cases[i].second, b->cases[i].second)) return false;
            }
            return true;
        }
    }
    return false;
}

Program expand_cases(const Program& p) {
    switch (p->kind) {
        case ProgKind::Skip:
        case ProgKind::Assign:
        case ProgKind::DWhile:
        case ProgKind::Hole: return p;
        case ProgKind::Seq: return pseq(expand_cases(p->a), expand_cases(p->b));
        case ProgKind::If: return pif(p->guard, expand_cases(p->a), expand_cases(p->b));
        case ProgKind::While: return pwhile(p->guard, expand_cases(p->a));
        case ProgKind::Case: {
            Program acc = pskip();
            for (auto it = p->cases.rbegin(); it != p->cases.rend(); ++it)
                acc = pif(it->first, expand_cases(it->second), acc);
            return acc;
        }
    }
    return p;
}

namespace {

void pr(std::ostringstream& os, const Program& p, const Vocabulary& vocab, int ind) {
    std::string pad(ind * 2, ' ');
    switch (p->kind) {
        case ProgKind::Skip: os << pad << "skip"; return;
        case ProgKind::Hole: os << pad << "hole(" << p->hole << ")"; return;
        case ProgKind::Assign:
            os << pad << vocab.name(p->var) << " := " << to_string(p->rhs, vocab);
            return;
        case ProgKind::Seq:
            pr(os, p->a, vocab, ind);
            os << ";\n";
            pr(os, p->b, vocab, ind);
            return;
        case ProgKind::If:
            os << pad << "if " << to_string(p->guard, vocab) << " then {\n";
            pr(os, p->a, vocab, ind + 1);
            os << "\n" << pad << "} else {\n";
            pr(os, p->b, vocab, ind + 1);
            os << "\n" << pad << "}";
            return;
        case ProgKind::While:
            os << pad << "while " << to_string(p->guard, vocab) << " {\n";
            pr(os, p->a, vocab, ind + 1);
            os << "\n" << pad << "}";
            return;
        case ProgKind::DWhile: {
            os << pad << "dwhile " << to_string(p->guard, vocab) << " {";
            bool first = true;
            for (auto& [x, f] : p->dyn.odes) {
                os << (first ? " " : ", ") << vocab.name(x) << "' = " << to_string(f, vocab);
                first = false;
            }
            os << " }";
            return;
        }
        case ProgKind::Case: {
            os << pad << "case {\n";
            for (auto& [g, q] : p->cases) {
                os << pad << "  " << to_string(g, vocab) << " => {\n";
                pr(os, q, vocab, ind + 2);
                os << "\n" << pad << "  }\n";
            }
            os << pad << "}";
            return;
        }
    }
}

}  // namespace

std::string to_string(const Program& p, const Vocabulary& vocab, int indent) {
    std::ostringstream os;
    pr(os, p, vocab, indent);
    return os.str();
}

}  // namespace hhl
