#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sccp/program.hpp"

namespace sccp {

struct Diagnostic {
  enum class Kind { Syntax, Semantic };
  Kind kind = Kind::Syntax;
  int line = 0;
  int col = 0;
  std::string message;
};

std::string format(const Diagnostic& d);

struct ParseResult {
  std::optional<SccpProgram> program;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return program.has_value() && diagnostics.empty(); }
  bool has_semantic_error() const;
};

// Parses a model file. On success `program` is set and `diagnostics` is
// empty; otherwise all collected errors are reported with positions.
ParseResult parse_program(std::string_view text);

}  // namespace sccp
