#include "levsense/core_model.hpp"

#include <algorithm>

namespace levsense {

ModeTable::ModeTable(std::vector<ModeEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!(e.frequency > 0) || !(e.decay_time > 0) || !(e.q_factor > 0)) {
      throw DomainError("ModeTable: frequency, decay_time and q_factor must be positive");
    }
  }
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const ModeEntry& a, const ModeEntry& b) { return a.frequency < b.frequency; });
}

std::vector<std::size_t> ModeTable::inconsistent_entries() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].q_mismatch() > kQTolerance) out.push_back(i);
  }
  return out;
}

const ModeEntry& ModeTable::nearest(double frequency) const {
  if (entries_.empty()) throw DomainError("ModeTable::nearest: table is empty");
  return *std::min_element(entries_.begin(), entries_.end(), [&](const auto& a, const auto& b) {
    return std::abs(a.frequency - frequency) < std::abs(b.frequency - frequency);
  });
}

OscillatorMode ModeTable::mode(std::size_t index, double effective_mass) const {
  const auto& e = entries_.at(index);
  return derive_mode(e.frequency, e.decay_time, effective_mass);
}

ModeTable measured_mode_table() {
  return ModeTable({{15.9, 3.65e4, 1.82e6},
                    {26.7, 1.09e5, 9.13e6},
                    {40.6, 1.43e4, 1.82e6},
                    {55.1, 3.37e4, 5.84e6},
                    {129.0, 0.214e4, 8.70e5},
                    {147.0, 0.152e4, 6.98e5}});
}

}  // namespace levsense
