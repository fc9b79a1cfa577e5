#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "maxnet/mac.hpp"

namespace maxnet {

/// Line-delimited JSON slot records, capped at `limit` lines:
///   {"slot":12,"tx":[3,9],"decodes":[[4,3]],"updates":[4]}
class TraceWriter {
public:
  TraceWriter() = default;
  TraceWriter(std::ostream *out, std::int64_t limit) : out_(out), limit_(limit) {}

  bool enabled() const { return out_ != nullptr && written_ < limit_; }

  void write(std::int64_t slot, const SlotOutcome &outcome, std::span<const NodeId> updates) {
    if (!enabled()) {
      return;
    }
    std::ostream &os = *out_;
    os << "{\"slot\":" << slot << ",\"tx\":[";
    for (std::size_t k = 0; k < outcome.transmitters.size(); ++k) {
      os << (k ? "," : "") << outcome.transmitters[k];
    }
    os << "],\"decodes\":[";
    for (std::size_t k = 0; k < outcome.receptions.size(); ++k) {
      os << (k ? "," : "") << '[' << outcome.receptions[k].receiver << ','
         << outcome.receptions[k].transmitter << ']';
    }
    os << "],\"updates\":[";
    for (std::size_t k = 0; k < updates.size(); ++k) {
      os << (k ? "," : "") << updates[k];
    }
    os << "]}\n";
    ++written_;
  }

private:
  std::ostream *out_ = nullptr;
  std::int64_t limit_ = 0;
  std::int64_t written_ = 0;
};

} // namespace maxnet
