#include "mcd/trace.hpp"

#include <ostream>
#include <sstream>

namespace mcd {

const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::CycleStart: return "cycle_start";
    case TraceKind::PassStart: return "pass_start";
    case TraceKind::Update: return "update";
    case TraceKind::Retx: return "retx";
    case TraceKind::MtArrival: return "mt_arrival";
    case TraceKind::Read: return "read";
    case TraceKind::Check: return "check";
    case TraceKind::CommitLocal: return "commit_local";
    case TraceKind::ValidateSent: return "validate_sent";
    case TraceKind::ValidateDone: return "validate_done";
    case TraceKind::ResultRecv: return "result_recv";
    case TraceKind::Reread: return "reread";
    case TraceKind::Restart: return "restart";
    case TraceKind::Timeout: return "timeout";
  }
  return "?";
}

namespace {

void append_list(std::ostream& os, const char* key, const std::vector<ItemId>& xs) {
  os << ",\"" << key << "\":[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ',';
    os << xs[i];
  }
  os << ']';
}

// Keys emitted in lexicographic order so reruns compare byte-for-byte.
void append_record(std::ostream& os, const TraceRecord& r) {
  os << "{\"a\":" << r.a                      //
     << ",\"channel\":" << r.channel          //
     << ",\"client\":" << r.client            //
     << ",\"cycle\":" << r.cycle              //
     << ",\"flag\":" << (r.flag ? "true" : "false")  //
     << ",\"item\":" << r.item;
  append_list(os, "items", r.items);
  append_list(os, "items2", r.items2);
  os << ",\"kind\":\"" << to_string(r.kind) << '"'  //
     << ",\"seq\":" << r.seq                        //
     << ",\"tick\":" << r.tick                      //
     << ",\"txn\":" << r.txn                        //
     << ",\"value\":" << r.value << "}\n";
}

}  // namespace

void write_jsonl(std::ostream& os, const std::vector<TraceRecord>& trace) {
  for (const TraceRecord& r : trace) append_record(os, r);
}

std::string to_jsonl(const std::vector<TraceRecord>& trace) {
  std::ostringstream os;
  write_jsonl(os, trace);
  return os.str();
}

}  // namespace mcd
