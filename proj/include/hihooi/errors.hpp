#pragma once

#include <stdexcept>
#include <string>

namespace hihooi {

// Parse-time failures. Kind is stable so tests can assert on it.
class ParseError : public std::runtime_error {
 public:
  enum class Kind {
    SyntaxError,
    UnknownTable,
    UnknownColumn,
    ArityMismatch,
  };
  ParseError(Kind k, std::string msg) : std::runtime_error(std::move(msg)), kind(k) {}
  Kind kind;
};

class EngineError : public std::runtime_error {
 public:
  enum class Kind {
    TableMissing,
    TypeError,
    WriteWriteConflict,
    DuplicateKey,
    UnboundPlaceholder,
    CorruptImage,
    TxnInactive,
  };
  EngineError(Kind k, std::string msg) : std::runtime_error(std::move(msg)), kind(k) {}
  Kind kind;
};

class RWSetError : public std::runtime_error {
 public:
  enum class Kind {
    UnboundPlaceholder,
    UnderflowViolation,
  };
  RWSetError(Kind k, std::string msg) : std::runtime_error(std::move(msg)), kind(k) {}
  Kind kind;
};

class SchedulerError : public std::runtime_error {
 public:
  enum class Kind {
    OutOfOrderDelivery,
    UnknownTransaction,
  };
  SchedulerError(Kind k, std::string msg) : std::runtime_error(std::move(msg)), kind(k) {}
  Kind kind;
};

class TmError : public std::runtime_error {
 public:
  enum class Kind {
    DuplicateCompletion,
    NoTargetAvailable,
    UnknownReplica,
    WouldWait,  // synchronous run_transaction cannot park an RSI-PC read
  };
  TmError(Kind k, std::string msg) : std::runtime_error(std::move(msg)), kind(k) {}
  Kind kind;
};

class ClusterError : public std::runtime_error {
 public:
  enum class Kind {
    BufferUnavailable,
    SpecValidation,
    InvariantViolation,
  };
  ClusterError(Kind k, std::string msg) : std::runtime_error(std::move(msg)), kind(k) {}
  Kind kind;
};

}  // namespace hihooi
