#include "tsnsim/frame.hpp"

#include <cctype>
#include <cstdio>

#include "tsnsim/errors.hpp"

namespace tsnsim {

MacAddress MacAddress::parse(std::string_view text)
{
    MacAddress mac;
    int octets = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        int nibbles = 0;
        unsigned octet = 0;
        while (i < text.size() && std::isxdigit(static_cast<unsigned char>(text[i])) && nibbles < 2) {
            const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
            octet = octet * 16 + static_cast<unsigned>(c <= '9' ? c - '0' : c - 'a' + 10);
            ++nibbles;
            ++i;
        }
        if (nibbles == 0)
            throw InvalidFrame("malformed MAC address '" + std::string(text) + "'");
        mac.value = (mac.value << 8) | octet;
        ++octets;
        if (i < text.size()) {
            if (text[i] != ':' && text[i] != '-')
                throw InvalidFrame("malformed MAC address '" + std::string(text) + "'");
            ++i;
            if (i == text.size())
                throw InvalidFrame("malformed MAC address '" + std::string(text) + "'");
        }
    }
    if (octets != 6)
        throw InvalidFrame("MAC address needs 6 octets: '" + std::string(text) + "'");
    return mac;
}

std::string MacAddress::to_string() const
{
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x",
                  static_cast<unsigned>((value >> 40) & 0xFF), static_cast<unsigned>((value >> 32) & 0xFF),
                  static_cast<unsigned>((value >> 24) & 0xFF), static_cast<unsigned>((value >> 16) & 0xFF),
                  static_cast<unsigned>((value >> 8) & 0xFF), static_cast<unsigned>(value & 0xFF));
    return buf;
}

bool wire_equal(const Frame &a, const Frame &b)
{
    return a.id == b.id && a.size_bytes == b.size_bytes && a.priority == b.priority &&
           a.stream == b.stream && a.seq == b.seq;
}

void check_frame_size(std::uint32_t size_bytes, FrameSizeLimits limits)
{
    if (size_bytes < limits.min_bytes || size_bytes > limits.max_bytes)
        throw InvalidFrame("frame size " + std::to_string(size_bytes) + " B outside [" +
                           std::to_string(limits.min_bytes) + ", " + std::to_string(limits.max_bytes) + "]");
}

Duration transmission_time(std::uint64_t size_bytes, std::uint64_t link_rate_bps, std::uint64_t overhead_bytes)
{
    if (link_rate_bps == 0)
        throw ZeroRate("link rate must be positive");
    using u128 = UInt128;
    const u128 bits_ns = static_cast<u128>(size_bytes + overhead_bytes) * 8u * 1'000'000'000u;
    return static_cast<Duration>((bits_ns + link_rate_bps / 2) / link_rate_bps);
}

} // namespace tsnsim
