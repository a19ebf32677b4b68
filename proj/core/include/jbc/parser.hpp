#pragma once

#include "jbc/program.hpp"

#include <stdexcept>
#include <string>

namespace jbc {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// Parses the textual bytecode format. Mnemonics are case-insensitive; line
// labels, when present, must equal the instruction's position.
Program parse_program(const std::string& text);

// Canonical rendering; parse_program(render_program(p)) reproduces p.
std::string render_program(const Program& p);

std::string render_instruction(const Instruction& ins);

} // namespace jbc
