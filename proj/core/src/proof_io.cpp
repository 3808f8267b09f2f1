#include "hhl/proof_io.hpp"

#include "hhl/parser.hpp"

#include <fstream>
#include <sstream>

namespace hhl {

namespace {

void indent(std::ostringstream& os, int n) {
    for (int i = 0; i < n; ++i) os << "  ";
}

void print_node(std::ostringstream& os, const ProofTree& t, const Vocabulary& vocab, int ind) {
    indent(os, ind);
    os << "rule " << rule_name_str(t->rule) << " {\n";
    const HoareQuadruple& c = t->conclusion;
    indent(os, ind + 1);
    os << "pre { " << to_string(c.pre, vocab) << " }\n";
    indent(os, ind + 1);
    os << "post { " << to_string(c.post, vocab) << " }\n";
    indent(os, ind + 1);
    os << "safety { " << to_string(c.safety, vocab) << " }\n";
    indent(os, ind + 1);
    os << "program {\n" << to_string(c.program, vocab, ind + 2) << "\n";
    indent(os, ind + 1);
    os << "}\n";
    for (const auto& row : t->invariants) {
        indent(os, ind + 1);
        os << "invariant "
           << (row.rel == InvRel::Eq ? "=" : row.rel == InvRel::Gt ? ">" : ">=") << " { "
           << to_string(row.e, vocab) << " }\n";
    }
    for (const auto& v : t->variants) {
        indent(os, ind + 1);
        os << "variant { " << to_string(v.variant, vocab) << " } terminator { "
           << to_string(v.terminator, vocab) << " }\n";
    }
    if (t->wh_variant) {
        indent(os, ind + 1);
        os << "whvariant { " << to_string(t->wh_variant, vocab) << " } fresh "
           << vocab.name(t->wh_fresh) << " " << (t->wh_strict ? "strict" : "nonstrict") << "\n";
    }
    if (!t->solutions.empty()) {
        indent(os, ind + 1);
        os << "soltime " << vocab.name(t->sol_time) << "\n";
        for (auto& [x, sol] : t->solutions) {
            indent(os, ind + 1);
            os << "solution " << vocab.name(x) << " { " << to_string(sol, vocab) << " }\n";
        }
        indent(os, ind + 1);
        os << "witness { " << to_string(t->sol_witness, vocab) << " }\n";
    }
    if (!t->premises.empty()) {
        indent(os, ind + 1);
        os << "premises {\n";
        for (const auto& p : t->premises) print_node(os, p, vocab, ind + 2);
        indent(os, ind + 1);
        os << "}\n";
    }
    indent(os, ind);
    os << "}\n";
}

RuleName rule_from_str(const std::string& s, Parser& p) {
    if (s == "skip") return RuleName::Skip;
    if (s == "seq") return RuleName::Seq;
    if (s == "assign") return RuleName::Assign;
    if (s == "if") return RuleName::If;
    if (s == "wh") return RuleName::Wh;
    if (s == "dwh") return RuleName::DWh;
    if (s == "dwhmulti") return RuleName::DWhMulti;
    if (s == "limp") return RuleName::LImp;
    if (s == "conj") return RuleName::Conj;
    if (s == "case") return RuleName::Case;
    if (s == "dwhsol") return RuleName::DWhSol;
    p.fail("unknown rule name '" + s + "'");
}

ProofTree parse_node(Parser& p) {
    p.expect("rule");
    ProofNode n;
    n.rule = rule_from_str(p.expect_ident(), p);
    p.expect("{");
    while (!p.peek_is("}")) {
        if (p.accept("pre")) {
            p.expect("{");
            n.conclusion.pre = p.parse_assertion();
            p.expect("}");
        } else if (p.accept("post")) {
            p.expect("{");
            n.conclusion.post = p.parse_assertion();
            p.expect("}");
        } else if (p.accept("safety")) {
            p.expect("{");
            n.conclusion.safety = p.parse_assertion();
            p.expect("}");
        } else if (p.accept("program")) {
            n.conclusion.program = p.parse_block();
        } else if (p.accept("invariant")) {
            InvRel rel;
            if (p.accept("="))
                rel = InvRel::Eq;
            else if (p.accept(">="))
                rel = InvRel::Ge;
            else if (p.accept(">"))
                rel = InvRel::Gt;
            else
                p.fail("expected invariant relation");
            p.expect("{");
            Term e = p.parse_term();
            p.expect("}");
            n.invariants.push_back({e, rel});
        } else if (p.accept("variant")) {
            p.expect("{");
            Term v = p.parse_term();
            p.expect("}");
            p.expect("terminator");
            p.expect("{");
            Term ter = p.parse_term();
            p.expect("}");
            n.variants.push_back({v, ter});
        } else if (p.accept("whvariant")) {
            p.expect("{");
            n.wh_variant = p.parse_term();
            p.expect("}");
            p.expect("fresh");
            n.wh_fresh = p.vocab()->intern(p.expect_ident());
            if (p.accept("strict"))
                n.wh_strict = true;
            else if (p.accept("nonstrict"))
                n.wh_strict = false;
            else
                p.fail("expected strict or nonstrict");
        } else if (p.accept("soltime")) {
            n.sol_time = p.vocab()->intern(p.expect_ident());
        } else if (p.accept("solution")) {
            VarId x = p.vocab()->intern(p.expect_ident());
            p.expect("{");
            Term sol = p.parse_term();
            p.expect("}");
            n.solutions.emplace_back(x, sol);
        } else if (p.accept("witness")) {
            p.expect("{");
            n.sol_witness = p.parse_term();
            p.expect("}");
        } else if (p.accept("premises")) {
            p.expect("{");
            while (!p.peek_is("}")) n.premises.push_back(parse_node(p));
            p.expect("}");
        } else {
            p.fail("unknown proof-node field");
        }
    }
    p.expect("}");
    if (!n.conclusion.pre || !n.conclusion.post || !n.conclusion.safety || !n.conclusion.program)
        p.fail("proof node missing part of its conclusion");
    return make_proof_node(std::move(n));
}

}  // namespace

std::string print_proof(const ProofTree& t, const Vocabulary& vocab) {
    std::ostringstream os;
    print_node(os, t, vocab, 0);
    return os.str();
}

ProofTree parse_proof(const std::string& text, const VocabPtr& vocab) {
    Parser p(text, vocab);
    ProofTree t = parse_node(p);
    if (!p.at_end()) p.fail("trailing input after proof");
    return t;
}

ProofTree load_proof_file(const std::string& path, const VocabPtr& vocab) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open proof file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_proof(ss.str(), vocab);
}

void save_proof_file(const std::string& path, const ProofTree& t, const Vocabulary& vocab) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write proof file: " + path);
    out << print_proof(t, vocab);
}

}  // namespace hhl
