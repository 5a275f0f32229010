#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "satlab/cnf.hpp"

namespace satlab {

class DimacsError : public std::runtime_error {
 public:
  DimacsError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Non-fatal oddities found while parsing, e.g. a variable repeated in a clause.
struct ParseWarning {
  int line = 0;
  int clause_index = 0;
  std::string message;
};

/// Reads DIMACS CNF: `c` comment lines, one `p cnf <vars> <clauses>` header,
/// zero-terminated clauses that may span lines. A `%` line ends the input
/// (SATLIB convention). Throws DimacsError on malformed input.
CnfFormula parse_dimacs(std::istream& in, std::vector<ParseWarning>* warnings = nullptr);
CnfFormula parse_dimacs(std::string_view text, std::vector<ParseWarning>* warnings = nullptr);
CnfFormula read_dimacs_file(const std::filesystem::path& path);

/// Canonical DIMACS: header then one clause per line, LF endings, no comments.
void write_dimacs(std::ostream& out, const CnfFormula& formula);
std::string write_dimacs(const CnfFormula& formula);
void write_dimacs_file(const std::filesystem::path& path, const CnfFormula& formula);

}  // namespace satlab
