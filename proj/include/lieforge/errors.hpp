#pragma once

#include <stdexcept>
#include <string>

namespace lieforge {

// Error classes map one-to-one onto CLI exit codes.
enum class ErrorClass {
  Usage = 10,
  InvalidElement = 11,
  Chart = 12,
  Regime = 13,
  Search = 14,
  Correction = 15,
  Size = 16,
  Decomposition = 17,
  Solver = 18,
  Stagnation = 19,
  Basin = 20,
  Integrity = 21,
  Migration = 22,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }
  int exit_code() const { return static_cast<int>(cls_); }

 private:
  ErrorClass cls_;
};

inline const char* error_class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::Usage: return "usage";
    case ErrorClass::InvalidElement: return "invalid-element";
    case ErrorClass::Chart: return "chart";
    case ErrorClass::Regime: return "regime";
    case ErrorClass::Search: return "search";
    case ErrorClass::Correction: return "correction";
    case ErrorClass::Size: return "size";
    case ErrorClass::Decomposition: return "decomposition";
    case ErrorClass::Solver: return "solver";
    case ErrorClass::Stagnation: return "stagnation";
    case ErrorClass::Basin: return "basin";
    case ErrorClass::Integrity: return "integrity";
    case ErrorClass::Migration: return "migration";
  }
  return "unknown";
}

}  // namespace lieforge
