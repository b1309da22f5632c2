#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "phiscrub/utf8.hpp"

namespace phiscrub {

/// A UTF-8 document decoded once. All offsets elsewhere in the library are
/// code-point offsets into this text.
class Text {
  public:
    Text() = default;
    explicit Text(std::string utf8_bytes)
        : bytes_(std::move(utf8_bytes)), cps_(utf8::decode(bytes_)),
          byte_of_(utf8::index_map(bytes_)) {}

    const std::string& bytes() const { return bytes_; }
    const std::vector<char32_t>& cps() const { return cps_; }
    std::size_t size() const { return cps_.size(); }

    /// Byte offset where code point i starts (i may equal size()).
    std::size_t byte_of(std::size_t cp) const { return byte_of_[cp]; }

    /// Code point index containing byte offset b (b may equal bytes().size()).
    std::size_t cp_of_byte(std::size_t b) const {
        auto it = std::upper_bound(byte_of_.begin(), byte_of_.end(), b);
        return static_cast<std::size_t>(it - byte_of_.begin()) - 1;
    }

    std::string slice(std::size_t cp_start, std::size_t cp_end) const {
        return bytes_.substr(byte_of_[cp_start], byte_of_[cp_end] - byte_of_[cp_start]);
    }

  private:
    std::string bytes_;
    std::vector<char32_t> cps_;
    std::vector<std::size_t> byte_of_;
};

}  // namespace phiscrub
