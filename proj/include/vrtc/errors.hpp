#pragma once

#include <stdexcept>
#include <string>

namespace vrtc {

// Malformed input data: pcap structure, CSV rows, config files, model files.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operation was invoked outside its documented contract
// (empty dataset, mismatched vector lengths, bad parameter value, ...).
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem-level failure: missing file, unwritable output path.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vrtc
