#include "tsnsim/stream_id.hpp"

#include "tsnsim/errors.hpp"

namespace tsnsim {

bool StreamPattern::matches(const StreamKey &key) const
{
    return (!dest_mac || *dest_mac == key.dest_mac) && (!vlan_id || *vlan_id == key.vlan_id) &&
           (!pcp || *pcp == key.pcp);
}

std::optional<StreamHandle> StreamRules::identify(const StreamKey &key) const
{
    for (const auto &rule : rules_)
        if (rule.pattern.matches(key))
            return rule.handle;
    return std::nullopt;
}

std::optional<StreamHandle> StreamRules::identify(const Frame &frame) const
{
    if (!frame.stream)
        return std::nullopt;
    return identify(*frame.stream);
}

StreamRules make_stream_rules(std::vector<StreamRule> rules)
{
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (!rules[i].pattern.exact())
            continue;
        for (std::size_t j = 0; j < i; ++j) {
            if (rules[j].pattern.exact() && rules[j].pattern == rules[i].pattern)
                throw DuplicateExactRule("stream rule " + std::to_string(i) + " repeats exact rule " +
                                         std::to_string(j));
        }
    }
    StreamRules out;
    out.rules_ = std::move(rules);
    return out;
}

} // namespace tsnsim
