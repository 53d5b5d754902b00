#pragma once

#include "ricci/estimator.hpp"
#include "ricci/markov.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ricci::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Bad command line, model spec or input file. Maps to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ModelKind { BernoulliLaplace, RandomTransposition, Complete, Product, File };

struct ParsedModel {
    ModelKind kind = ModelKind::File;
    int n = 0;
    int k = 0;
    MarkovTriple triple;
};

/// bl(n,k) | rt(n) | complete(n) | product(SPEC,SPEC) | file:PATH
ParsedModel parse_model(const std::string& spec);

/// Reads a chain from the text edge-list format or, for *.json or input
/// starting with '{', the JSON document format.
MarkovTriple read_chain(const std::string& path);
MarkovTriple parse_chain_text(std::istream& in);
MarkovTriple parse_chain_json(const std::string& text);
void write_chain_text(std::ostream& out, const MarkovTriple& t);
void write_chain_json(std::ostream& out, const MarkovTriple& t);

/// The exact certificate for a model: the dedicated proofs for bl and rt, the
/// generic assembly otherwise (nullopt when it refuses).
std::optional<Certificate> certificate_for(const ParsedModel& m);

/// Entry point. args excludes the program name. Returns the exit code:
/// 0 ok, 1 a check failed, 2 invalid input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ricci::cli
