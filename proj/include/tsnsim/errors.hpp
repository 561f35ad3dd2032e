#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsnsim {

class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// sim-core
struct PastTime : Error { using Error::Error; };
struct ClockUnderflow : Error { using Error::Error; };

// traffic-model
struct ZeroRate : Error { using Error::Error; };
struct DuplicateExactRule : Error { using Error::Error; };
struct InvalidFrame : Error { using Error::Error; };

// egress-shaping
struct InvalidSchedule : Error { using Error::Error; };
struct BeforeBaseTime : Error { using Error::Error; };
struct MissingTxtime : Error { using Error::Error; };
struct NotPreemptable : Error { using Error::Error; };

// redundancy
struct NoPaths : Error { using Error::Error; };
struct MissingSeq : Error { using Error::Error; };

// network-topology
struct ZeroHops : Error { using Error::Error; };
struct UnknownEgress : Error { using Error::Error; };

// measurement-harness
struct MissingTimestamp : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

class MalformedRow : public Error
{
  public:
    MalformedRow(std::size_t line, const std::string &why)
        : Error("line " + std::to_string(line) + ": " + why), line_(line)
    {
    }
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Scenario validation failure carrying one diagnostic per offending field,
/// each formatted as "<dotted.path>: <problem>".
class ConfigInvalid : public Error
{
  public:
    explicit ConfigInvalid(std::vector<std::string> diagnostics)
        : Error(join(diagnostics)), diagnostics_(std::move(diagnostics))
    {
    }
    const std::vector<std::string> &diagnostics() const noexcept { return diagnostics_; }

  private:
    static std::string join(const std::vector<std::string> &lines)
    {
        std::string out = "invalid scenario";
        for (const auto &l : lines)
            out += "\n  " + l;
        return out;
    }
    std::vector<std::string> diagnostics_;
};

} // namespace tsnsim
