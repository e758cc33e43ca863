#pragma once

#include <stdexcept>
#include <string>

namespace cobble {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller violated a lifecycle contract (unknown txn, double terminate, ...).
class TxnStateError : public Error {
public:
    using Error::Error;
};

// A read timestamp fell outside what a store (or the engine horizon) covers.
class WindowViolation : public Error {
public:
    using Error::Error;
};

// Begin raced with a rotation or compaction; retry with a fresh snapshot.
class StaleSnapshot : public WindowViolation {
public:
    using WindowViolation::WindowViolation;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Checksum mismatch, bad magic or undecodable content.
class IntegrityError : public Error {
public:
    using Error::Error;
};

class InvalidKey : public Error {
public:
    using Error::Error;
};

}  // namespace cobble
