#pragma once

#include "jbc/value.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace jbc {

enum class Op {
  Load,
  Store,
  Push,
  Pop,
  IAdd,
  ISub,
  CmpGeq,
  CmpEq,
  CmpNeq,
  And,
  Or,
  Not,
  Goto,
  IfFalse,
  New,
  Getfield,
  Putfield,
  Checkcast,
  Invoke,
  Return,
};

const char* op_name(Op op);
std::optional<Op> op_from_name(const std::string& name); // case-insensitive

struct Instruction {
  Op op = Op::Pop;
  int n = 0;          // register index, jump offset, or argument count
  Value lit = Unit{}; // Push operand
  std::string name;   // field, method, or class name
  std::string cls;    // class qualifier of a field access
};

struct Field {
  std::string type;
  std::string name;
};

struct Param {
  std::string type;
  std::string name;
};

struct Method {
  std::string ret_type;
  std::string name;
  std::vector<Param> params;
  int max_stack = 0;
  int max_vars = 0; // extra local slots beyond this and the parameters
  std::vector<Instruction> body;
};

struct ClassDecl {
  std::string name;
  std::string super = "Object";
  std::vector<Field> fields;
  std::vector<Method> methods;
};

// A field slot of a class, together with the class that declares it.
struct FieldSlot {
  std::string owner; // declaring class
  std::string type;
  std::string name;
};

struct Program {
  std::vector<ClassDecl> classes;

  const ClassDecl* find_class(const std::string& name) const;
  bool is_class_type(const std::string& t) const;

  // Subclass order on declared classes; "Object" is the implicit root.
  bool is_subclass(const std::string& a, const std::string& b) const;
  std::string lub_class(const std::string& a, const std::string& b) const;

  struct MethodRef {
    const ClassDecl* cls = nullptr;
    const Method* method = nullptr;
  };
  // Walks the superclass chain of cn upward for a method named mn.
  std::optional<MethodRef> resolve_method(const std::string& cn, const std::string& mn) const;

  // Field layout of cn: inherited fields first, then own declarations.
  std::vector<FieldSlot> field_table(const std::string& cn) const;
  // Slot position of the field declared as (owner, fname) in cn's layout.
  std::optional<std::size_t> field_index(const std::string& cn, const std::string& owner,
                                         const std::string& fname) const;
  // Declaring class of fname, searching cn's chain upward.
  std::optional<std::string> field_owner(const std::string& cn, const std::string& fname) const;

  // All declared subclasses of cn including cn itself, in declaration order.
  std::vector<std::string> subclasses_of(const std::string& cn) const;
};

// Default value a New-allocated object gets for a field of the given type.
Value default_field_value(const Program& p, const std::string& type);

} // namespace jbc
