#include "pss/feature_table.hpp"

#include <charconv>
#include <ostream>

#include "pss/common.hpp"

namespace pss {

FeatureTable::FeatureTable(std::vector<std::string> names, std::size_t rows)
    : names_(std::move(names)), rows_(rows), data_(rows_ * names_.size(), 0.0), flags_(rows, 0) {}

int FeatureTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return -1;
}

std::uint64_t layout_version_of(std::span<const std::string> names) {
  std::uint64_t h = fnv1a("pss-layout-v1");
  for (const auto& n : names) {
    h = fnv1a(n, h);
    h = fnv1a("\x1f", 1, h);
  }
  return h;
}

std::uint64_t FeatureTable::layout_version() const { return layout_version_of(names_); }

void FeatureTable::append(const FeatureTable& other) {
  if (rows_ == 0 && names_.empty()) names_ = other.names_;
  if (other.names_ != names_) throw InputError("cannot append feature tables with different layouts");
  data_.insert(data_.end(), other.data_.begin(), other.data_.end());
  flags_.insert(flags_.end(), other.flags_.begin(), other.flags_.end());
  rows_ += other.rows_;
}

std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void FeatureTable::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < cols(); ++c) out << (c ? "," : "") << names_[c];
  out << '\n';
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols(); ++c) out << (c ? "," : "") << format_number(at(r, c));
    out << '\n';
  }
}

}  // namespace pss
