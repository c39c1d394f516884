#pragma once

#include <stdexcept>
#include <string>

namespace stratstab {

enum class Err {
    InvalidArgument,
    AlphaOutOfRange,
    NonMonotoneShear,
    DegenerateShear,
    BranchViolation,
    NonContractive,
    ToleranceNotReached,
    ZeroOnContour,
    RefinementExhausted,
    NoZeroFound,
    NotAZero,
    CflViolation,
    NoBlowupWithinBudget,
    NoGrowth,
    IncompatibleEps,
};

class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Err code() const { return code_; }

private:
    Err code_;
};

inline const char* err_name(Err e) {
    switch (e) {
        case Err::InvalidArgument: return "InvalidArgument";
        case Err::AlphaOutOfRange: return "AlphaOutOfRange";
        case Err::NonMonotoneShear: return "NonMonotoneShear";
        case Err::DegenerateShear: return "DegenerateShear";
        case Err::BranchViolation: return "BranchViolation";
        case Err::NonContractive: return "NonContractive";
        case Err::ToleranceNotReached: return "ToleranceNotReached";
        case Err::ZeroOnContour: return "ZeroOnContour";
        case Err::RefinementExhausted: return "RefinementExhausted";
        case Err::NoZeroFound: return "NoZeroFound";
        case Err::NotAZero: return "NotAZero";
        case Err::CflViolation: return "CflViolation";
        case Err::NoBlowupWithinBudget: return "NoBlowupWithinBudget";
        case Err::NoGrowth: return "NoGrowth";
        case Err::IncompatibleEps: return "IncompatibleEps";
    }
    return "Unknown";
}

}  // namespace stratstab
