#include "satlab/dimacs.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace satlab {
namespace {

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\f\v") == std::string_view::npos;
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_int(std::string_view token, long long& value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

CnfFormula parse_dimacs(std::istream& in, std::vector<ParseWarning>* warnings) {
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  bool any_content = false;
  long long declared_vars = 0;
  long long declared_clauses = 0;
  std::vector<Clause> clauses;
  Clause current;
  int current_start_line = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (is_blank(view)) continue;
    const auto tokens = split_tokens(view);
    if (tokens.front().front() == 'c') continue;
    if (tokens.front() == "%") break;
    any_content = true;

    if (tokens.front() == "p") {
      if (header_seen) throw DimacsError(line_no, "duplicate problem header");
      if (tokens.size() != 4 || tokens[1] != "cnf" || !parse_int(tokens[2], declared_vars) ||
          !parse_int(tokens[3], declared_clauses) || declared_vars < 0 || declared_clauses < 0) {
        throw DimacsError(line_no, "malformed header, expected 'p cnf <vars> <clauses>'");
      }
      header_seen = true;
      continue;
    }
    if (!header_seen) throw DimacsError(line_no, "clause data before 'p cnf' header");

    for (auto token : tokens) {
      long long lit = 0;
      if (!parse_int(token, lit)) {
        throw DimacsError(line_no, "invalid literal '" + std::string(token) + "'");
      }
      if (lit == 0) {
        for (std::size_t a = 0; a < current.literals.size(); ++a) {
          for (std::size_t b = a + 1; b < current.literals.size(); ++b) {
            if (current.literals[a].var == current.literals[b].var && warnings != nullptr) {
              warnings->push_back({current_start_line, static_cast<int>(clauses.size()),
                                   "variable " + std::to_string(current.literals[a].var) +
                                       " repeated in clause"});
            }
          }
        }
        clauses.push_back(std::move(current));
        current = Clause{};
        continue;
      }
      const long long var = lit < 0 ? -lit : lit;
      if (var > declared_vars) {
        throw DimacsError(line_no, "literal " + std::to_string(lit) + " exceeds declared " +
                                       std::to_string(declared_vars) + " variables");
      }
      if (current.literals.empty()) current_start_line = line_no;
      current.literals.push_back(Literal::from_dimacs(static_cast<int>(lit)));
    }
  }

  if (!any_content) throw DimacsError(line_no, "empty input");
  if (!header_seen) throw DimacsError(line_no, "missing 'p cnf' header");
  if (!current.literals.empty()) {
    throw DimacsError(current_start_line, "clause missing terminating 0");
  }
  if (static_cast<long long>(clauses.size()) != declared_clauses) {
    throw DimacsError(line_no, "header declares " + std::to_string(declared_clauses) +
                                   " clauses but " + std::to_string(clauses.size()) +
                                   " were read");
  }
  return CnfFormula(static_cast<int>(declared_vars), std::move(clauses));
}

CnfFormula parse_dimacs(std::string_view text, std::vector<ParseWarning>* warnings) {
  std::istringstream in{std::string(text)};
  return parse_dimacs(in, warnings);
}

CnfFormula read_dimacs_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return parse_dimacs(in);
  } catch (const DimacsError& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_dimacs(std::ostream& out, const CnfFormula& formula) {
  out << "p cnf " << formula.num_vars() << ' ' << formula.num_clauses() << '\n';
  for (const auto& clause : formula.clauses()) {
    for (const auto& lit : clause.literals) out << lit.dimacs() << ' ';
    out << "0\n";
  }
}

std::string write_dimacs(const CnfFormula& formula) {
  std::ostringstream out;
  write_dimacs(out, formula);
  return out.str();
}

void write_dimacs_file(const std::filesystem::path& path, const CnfFormula& formula) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_dimacs(out, formula);
}

}  // namespace satlab
