#ifndef PEXMAP_ERRORS_HPP
#define PEXMAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pexmap {

enum class ErrorCode {
    usage,
    zero_point,
    point_in_tail,
    cell_explosion,
    tail_dominates,
    h1_failure,
    no_acip,
    non_convergence,
    zero_density,
    support_mismatch,
    bad_parameter,
    covering_ratio_zero,
    family_not_proper,
    non_integrable,
    divergent_series,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace pexmap

#endif
