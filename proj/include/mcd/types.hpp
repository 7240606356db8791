#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mcd {

using ItemId = std::uint32_t;
using Cycle = std::uint64_t;   // dissemination cycle number, 1-based; 0 = "never"
using Tick = std::uint64_t;    // slotted time; one transmission unit per tick per channel
using TxnId = std::uint64_t;

// Configuration rejected before a run starts. `field` names the offending key.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string f, const std::string& msg)
      : std::runtime_error(f + ": " + msg), field(std::move(f)) {}
};

// Internal contract violation (scheduler fed a bad frame, lock protocol misuse, ...).
struct SimError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace mcd
