#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "tsnsim/frame.hpp"

namespace tsnsim {

struct StreamHandle
{
    std::uint32_t value = 0;
    auto operator<=>(const StreamHandle &) const = default;
};

/// Match on (dest MAC, VLAN, PCP); an absent field is a wildcard.
struct StreamPattern
{
    std::optional<MacAddress> dest_mac;
    std::optional<std::uint16_t> vlan_id;
    std::optional<std::uint8_t> pcp;

    bool matches(const StreamKey &key) const;
    bool exact() const { return dest_mac && vlan_id && pcp; }

    auto operator<=>(const StreamPattern &) const = default;
};

struct StreamRule
{
    StreamPattern pattern;
    StreamHandle handle;
};

/// Ordered stream identification table; the first matching rule wins.
class StreamRules
{
  public:
    StreamRules() = default;

    std::optional<StreamHandle> identify(const StreamKey &key) const;
    std::optional<StreamHandle> identify(const Frame &frame) const;

    const std::vector<StreamRule> &rules() const noexcept { return rules_; }
    bool empty() const noexcept { return rules_.empty(); }

  private:
    friend StreamRules make_stream_rules(std::vector<StreamRule> rules);
    std::vector<StreamRule> rules_;
};

/// Throws DuplicateExactRule when two fully specified patterns are equal.
StreamRules make_stream_rules(std::vector<StreamRule> rules);

} // namespace tsnsim
