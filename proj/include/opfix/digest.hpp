#pragma once

// 64-bit FNV-1a, used for config digests and reproducibility checks on
// aggregate sample buffers.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace opfix {

class Fnv1a64 {
  public:
    void update(const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t j = 0; j < size; ++j) {
            state_ ^= bytes[j];
            state_ *= 0x100000001B3ULL;
        }
    }
    void update(std::string_view text) { update(text.data(), text.size()); }
    void update(const std::vector<double>& values) {
        update(values.data(), values.size() * sizeof(double));
    }
    std::uint64_t value() const { return state_; }

  private:
    std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

inline std::uint64_t fnv1a64(std::string_view text) {
    Fnv1a64 h;
    h.update(text);
    return h.value();
}

}  // namespace opfix
