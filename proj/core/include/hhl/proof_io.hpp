// Proof-tree file format: nested rule blocks with explicit conclusions,
// round-tripping through the pretty-printer.
#pragma once

#include "hhl/checker.hpp"

namespace hhl {

std::string print_proof(const ProofTree& t, const Vocabulary& vocab);
ProofTree parse_proof(const std::string& text, const VocabPtr& vocab);

ProofTree load_proof_file(const std::string& path, const VocabPtr& vocab);
void save_proof_file(const std::string& path, const ProofTree& t, const Vocabulary& vocab);

}  // namespace hhl
