#include "tsnsim/frer.hpp"

#include <algorithm>
#include <stdexcept>

#include "tsnsim/errors.hpp"

namespace tsnsim {

std::vector<PathCopy> replicate(const Frame &frame, std::span<const std::uint32_t> member_paths)
{
    if (member_paths.empty())
        throw NoPaths("replication needs at least one member path");
    if (!frame.seq)
        throw MissingSeq("frame " + std::to_string(frame.id) + " has no sequence number");
    std::vector<PathCopy> out;
    out.reserve(member_paths.size());
    for (const auto path : member_paths)
        out.push_back({path, frame});
    return out;
}

RecoveryState::RecoveryState(std::size_t window_size) : window_(window_size), seen_(window_size, -1)
{
    if (window_ == 0 || window_ > 32768)
        throw std::invalid_argument("recovery window must be in [1, 32768]");
}

RecoverResult RecoveryState::recover(std::uint16_t seq)
{
    const auto slot = [&](std::uint16_t s) -> std::int32_t & { return seen_[s % window_]; };

    if (!anchored_) {
        anchored_ = true;
        highest_ = seq;
        std::fill(seen_.begin(), seen_.end(), -1);
        slot(seq) = seq;
        ++accepted_;
        return RecoverResult::Accept;
    }

    const auto forward = static_cast<std::uint16_t>(seq - highest_);
    if (forward == 0) {
        ++duplicates_;
        return RecoverResult::DiscardDuplicate;
    }
    if (forward < 32768) {
        // Slide: everything between the old anchor and seq becomes unseen.
        if (forward >= window_) {
            std::fill(seen_.begin(), seen_.end(), -1);
        } else {
            for (std::uint16_t k = 1; k < forward; ++k)
                slot(static_cast<std::uint16_t>(highest_ + k)) = -1;
        }
        highest_ = seq;
        slot(seq) = seq;
        ++accepted_;
        return RecoverResult::Accept;
    }

    const auto behind = static_cast<std::uint16_t>(highest_ - seq);
    if (behind >= window_) {
        ++stale_;
        return RecoverResult::DiscardStale;
    }
    if (slot(seq) == seq) {
        ++duplicates_;
        return RecoverResult::DiscardDuplicate;
    }
    slot(seq) = seq;
    ++accepted_;
    return RecoverResult::Accept;
}

RecoverResult RecoveryState::recover(const Frame &frame)
{
    if (!frame.seq)
        throw MissingSeq("frame " + std::to_string(frame.id) + " has no sequence number");
    return recover(*frame.seq);
}

RecoverResult recover(RecoveryState &state, const Frame &frame) { return state.recover(frame); }

} // namespace tsnsim
