#ifndef VAEBGM_CORE_HASH_HPP
#define VAEBGM_CORE_HASH_HPP

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace vaebgm {

/// 64-bit FNV-1a. Used for schema, config and provenance fingerprints.
class Fnv1a {
  public:
    Fnv1a &update(std::string_view bytes) {
        for (const unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    [[nodiscard]] std::uint64_t value() const { return state_; }
    [[nodiscard]] std::string hex() const { return to_hex(state_); }

    static std::string to_hex(std::uint64_t v) {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
        return buf;
    }

  private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string hash_hex(std::string_view bytes) { return Fnv1a{}.update(bytes).hex(); }

}  // namespace vaebgm

#endif
