#pragma once

// Row-major bit-packed lattice. A set bit marks a present cell, i.e. a closed
// square (or closed interval when the lattice has a single row).

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fracperc {

class BitGrid {
 public:
  BitGrid() = default;
  BitGrid(std::int64_t width, std::int64_t height)
      : width_(width), height_(height), stride_((width + 63) / 64) {
    if (width < 0 || height < 0) throw std::invalid_argument("BitGrid: negative extent");
    words_.assign(static_cast<std::size_t>(stride_ * height_), 0);
  }

  [[nodiscard]] std::int64_t width() const { return width_; }
  [[nodiscard]] std::int64_t height() const { return height_; }
  [[nodiscard]] std::int64_t cell_count() const { return width_ * height_; }
  [[nodiscard]] std::int64_t words_per_row() const { return stride_; }

  [[nodiscard]] bool get(std::int64_t x, std::int64_t y) const {
    const auto& w = words_[index(x, y)];
    return (w >> (x & 63)) & 1u;
  }

  /// Out-of-range coordinates read as absent (zero padding).
  [[nodiscard]] bool get_padded(std::int64_t x, std::int64_t y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
    return get(x, y);
  }

  void set(std::int64_t x, std::int64_t y, bool value = true) {
    auto& w = words_[index(x, y)];
    const std::uint64_t mask = std::uint64_t{1} << (x & 63);
    if (value) {
      w |= mask;
    } else {
      w &= ~mask;
    }
  }

  void fill(bool value) {
    for (auto& w : words_) w = value ? ~std::uint64_t{0} : 0;
    clear_padding();
  }

  [[nodiscard]] std::int64_t popcount() const {
    std::int64_t total = 0;
    for (auto w : words_) total += std::popcount(w);
    return total;
  }

  /// Bitwise negation inside the lattice.
  [[nodiscard]] BitGrid inverted() const {
    BitGrid out = *this;
    for (auto& w : out.words_) w = ~w;
    out.clear_padding();
    return out;
  }

  [[nodiscard]] const std::uint64_t* row(std::int64_t y) const {
    return words_.data() + y * stride_;
  }
  [[nodiscard]] std::uint64_t* row(std::int64_t y) { return words_.data() + y * stride_; }

  [[nodiscard]] bool is_subset_of(const BitGrid& other) const {
    if (other.width_ != width_ || other.height_ != height_) return false;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i] & ~other.words_[i]) return false;
    }
    return true;
  }

  friend bool operator==(const BitGrid&, const BitGrid&) = default;

 private:
  [[nodiscard]] std::size_t index(std::int64_t x, std::int64_t y) const {
    return static_cast<std::size_t>(y * stride_ + (x >> 6));
  }

  void clear_padding() {
    const int tail = static_cast<int>(width_ & 63);
    if (tail == 0) return;
    const std::uint64_t keep = (std::uint64_t{1} << tail) - 1;
    for (std::int64_t y = 0; y < height_; ++y) words_[index(width_ - 1, y)] &= keep;
  }

  std::int64_t width_ = 0;
  std::int64_t height_ = 0;
  std::int64_t stride_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace fracperc
