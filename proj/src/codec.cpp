#include "mcd/codec.hpp"

#include <cstring>
#include <string>

namespace mcd {

namespace {

constexpr std::size_t kHeaderBytes = 12;  // u32 channel + u64 cycle
constexpr std::size_t kEntryBytes = 21;   // u32 + u32 + u32 + u64 + u8

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}
std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const CycleFrame& frame,
                                       std::span<const std::uint32_t> payload_words) {
  if (payload_words.size() != frame.payload_length)
    throw SimError("encode_frame: payload has " + std::to_string(payload_words.size()) +
                   " words, frame declares " + std::to_string(frame.payload_length));
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + kEntryBytes * frame.index.size() + 4 * payload_words.size());
  put_u32(out, frame.channel);
  put_u64(out, frame.cycle);
  for (const IndexEntry& e : frame.index) {
    put_u32(out, e.item_id);
    put_u32(out, e.offset);
    put_u32(out, e.size);
    put_u64(out, e.last_updated_cycle);
    out.push_back(e.updated_flag ? 1 : 0);
  }
  for (std::uint32_t w : payload_words) put_u32(out, w);
  return out;
}

DecodedFrame decode_frame(std::span<const std::uint8_t> bytes, FrameLayout layout) {
  if (bytes.size() < kHeaderBytes) throw SimError("decode_frame: truncated header");

  // Find the entry count E satisfying
  //   bytes = 12 + 21 E + 4 * payload(E),
  // where payload(E) is the size sum of the first E entries. Sizes are >= 1,
  // so the right-hand side is strictly increasing in E and the solution is
  // unique when it exists.
  const std::size_t total = bytes.size();
  std::size_t n_entries = 0;
  bool solved = false;
  for (std::size_t e = 0;; ++e) {
    const std::size_t entries_end = kHeaderBytes + kEntryBytes * e;
    if (entries_end > total) break;
    std::uint64_t payload = 0;
    bool ok = true;
    for (std::size_t k = 0; k < e; ++k) {
      const std::size_t at = kHeaderBytes + kEntryBytes * k + 8;  // size field
      const std::uint32_t size = get_u32(bytes, at);
      if (size == 0) {
        ok = false;
        break;
      }
      payload += size;
    }
    if (!ok) break;
    if (entries_end + 4 * payload == total) {
      n_entries = e;
      solved = true;
      break;
    }
    if (entries_end + 4 * payload > total) break;
  }
  if (!solved) throw SimError("decode_frame: byte length matches no entry count");

  DecodedFrame out;
  out.frame.channel = get_u32(bytes, 0);
  out.frame.cycle = get_u64(bytes, 4);
  out.frame.layout = layout;
  std::size_t at = kHeaderBytes;
  std::uint32_t payload_len = 0;
  for (std::size_t k = 0; k < n_entries; ++k) {
    IndexEntry e;
    e.item_id = get_u32(bytes, at);
    e.offset = get_u32(bytes, at + 4);
    e.size = get_u32(bytes, at + 8);
    e.last_updated_cycle = get_u64(bytes, at + 12);
    e.updated_flag = bytes[at + 20] != 0;
    out.frame.index.push_back(e);
    payload_len += e.size;
    at += kEntryBytes;
  }
  out.frame.payload_length = payload_len;
  out.payload.reserve(payload_len);
  for (std::uint32_t k = 0; k < payload_len; ++k) out.payload.push_back(get_u32(bytes, at + 4 * k));
  return out;
}

}  // namespace mcd
