#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcd/core.hpp"

namespace mcd {

// Little-endian wire form of one cycle frame:
//   header  = [channel: u32][cycle: u64]
//   entry   = [item_id: u32][offset: u32][size: u32][last_updated_cycle: u64][updated_flag: u8]
//   payload = concatenated item words, one u32 per transmission unit
// payload_words.size() must equal frame.payload_length.
std::vector<std::uint8_t> encode_frame(const CycleFrame& frame,
                                       std::span<const std::uint32_t> payload_words);

struct DecodedFrame {
  CycleFrame frame;
  std::vector<std::uint32_t> payload;
};

// Entry count is not on the wire; it is recovered from the unique solution of
// bytes = 12 + 21*E + 4*payload(E), which is strictly increasing in E.
// Throws SimError on malformed input.
DecodedFrame decode_frame(std::span<const std::uint8_t> bytes, FrameLayout layout = {});

}  // namespace mcd
