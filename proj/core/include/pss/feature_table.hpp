#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pss {

/// Row-major table of named double channels. The channel list defines the
/// layout; layout_version() is a hash of it, stored in trained models so a
/// model is never applied to vectors of a different layout.
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(std::vector<std::string> names, std::size_t rows);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t cols() const { return names_.size(); }
  std::size_t rows() const { return rows_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  const std::vector<double>& data() const { return data_; }

  /// Per-row bit flags (meaning defined by the producer).
  std::vector<std::uint8_t>& flags() { return flags_; }
  const std::vector<std::uint8_t>& flags() const { return flags_; }

  /// Column index of `name`, or -1.
  int column(std::string_view name) const;

  std::uint64_t layout_version() const;

  /// Appends rows of another table with the same layout.
  void append(const FeatureTable& other);

  void write_csv(std::ostream& out) const;

 private:
  std::vector<std::string> names_;
  std::size_t rows_ = 0;
  std::vector<double> data_;
  std::vector<std::uint8_t> flags_;
};

std::uint64_t layout_version_of(std::span<const std::string> names);

/// Shortest round-trip decimal text for a double.
std::string format_number(double v);

}  // namespace pss
