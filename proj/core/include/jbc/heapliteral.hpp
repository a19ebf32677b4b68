#pragma once

#include "jbc/program.hpp"
#include "jbc/vm.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace jbc {

struct LiteralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Builds heap values from argument literals:
//   null | unit | true | false | -12 | List{val:1,next:null} | #1 List{...} | @1
// '#k' tags the object being built, '@k' refers back to it; tags are shared
// across all literals parsed by one builder, so arguments can share structure
// and form cycles. Omitted fields take their default values.
class LiteralBuilder {
public:
  explicit LiteralBuilder(const Program& p) : prog_(p) {}

  Value parse(const std::string& text);

  const std::map<std::uint32_t, HeapObj>& heap() const { return heap_; }
  std::uint32_t next_addr() const { return next_addr_; }

private:
  const Program& prog_;
  std::map<std::uint32_t, HeapObj> heap_;
  std::map<std::string, std::uint32_t> tags_;
  std::uint32_t next_addr_ = 1;
};

} // namespace jbc
