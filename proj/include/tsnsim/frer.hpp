#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tsnsim/frame.hpp"

namespace tsnsim {

class SequenceGenerator
{
  public:
    explicit SequenceGenerator(std::uint16_t first = 0) : next_(first) {}

    std::uint16_t generate() { return next_++; }
    Frame tag(Frame frame)
    {
        frame.seq = generate();
        return frame;
    }
    std::uint16_t peek() const noexcept { return next_; }

  private:
    std::uint16_t next_;
};

struct PathCopy
{
    std::uint32_t path = 0;
    Frame frame;
};

/// One copy per member path. Throws NoPaths for an empty list and
/// MissingSeq if the frame carries no sequence number.
std::vector<PathCopy> replicate(const Frame &frame, std::span<const std::uint32_t> member_paths);

enum class RecoverResult
{
    Accept,
    DiscardDuplicate,
    DiscardStale,
};

/// Sequence-window duplicate elimination. "Newer" uses serial-number
/// arithmetic: a forward distance below 32768 (mod 65536).
class RecoveryState
{
  public:
    static constexpr std::size_t kDefaultWindow = 64;

    explicit RecoveryState(std::size_t window_size = kDefaultWindow);

    RecoverResult recover(std::uint16_t seq);

    /// Throws MissingSeq if the frame has no sequence number.
    RecoverResult recover(const Frame &frame);

    std::size_t window_size() const noexcept { return window_; }
    bool has_anchor() const noexcept { return anchored_; }
    std::uint16_t highest_seq() const noexcept { return highest_; }

    std::uint64_t accepted() const noexcept { return accepted_; }
    std::uint64_t duplicates() const noexcept { return duplicates_; }
    std::uint64_t stale() const noexcept { return stale_; }

  private:
    std::size_t window_;
    bool anchored_ = false;
    std::uint16_t highest_ = 0;
    std::vector<std::int32_t> seen_; // slot seq % window holds seq, or -1
    std::uint64_t accepted_ = 0;
    std::uint64_t duplicates_ = 0;
    std::uint64_t stale_ = 0;
};

RecoverResult recover(RecoveryState &state, const Frame &frame);

} // namespace tsnsim
