#pragma once

#include <stdexcept>
#include <string>

namespace hints {

enum class ErrorKind {
  Usage,     // bad configuration or arguments
  Data,      // malformed or inconsistent input data
  Contract,  // caller broke a documented precondition
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_usage(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrorKind::Data, msg); }
[[noreturn]] inline void throw_contract(const std::string& msg) { throw Error(ErrorKind::Contract, msg); }

}  // namespace hints
