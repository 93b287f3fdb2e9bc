#ifndef PEXMAP_MAP_MODEL_HPP
#define PEXMAP_MAP_MODEL_HPP

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pexmap/errors.hpp"
#include "pexmap/interval.hpp"

namespace pexmap {

// Affine branch action y = slope*x + intercept.
struct AffineAction {
    double slope = 0.0;
    double intercept = 0.0;
};

// Strictly monotone C^1 branch given by callables.
struct GeneralAction {
    std::function<double(double)> forward;
    std::function<double(double)> derivative;
    bool increasing = true;
};

struct BranchSpec {
    int index = 0;                                  // 1-based
    Interval domain;                                // (left, right]
    std::variant<AffineAction, GeneralAction> action;
    Interval image;                                 // exact for affine branches

    bool affine() const { return std::holds_alternative<AffineAction>(action); }
    const AffineAction& affine_action() const { return std::get<AffineAction>(action); }

    double apply(double x) const;
    double derivative_at(double x) const;
};

// A cell of the relative partition window/xi_n: the set of x with
// T^j x in W_{word[j]} for 0 <= j < n.
struct Cell {
    std::vector<int> word;
    Interval interval;      // subinterval of the window
    Interval image;         // T^n(interval), exact endpoints for affine maps
    // composite T^n restricted to the cell, valid when composite_affine
    bool composite_affine = false;
    double slope = 0.0;
    double intercept = 0.0;
};

inline constexpr int kNotSeparated = -1;
inline constexpr std::size_t kDefaultCellCap = 1'000'000;

enum class Family { doubling, dyadic, vssv, geometric_tail, explicit_list };

struct LambdaRule {
    enum class Kind { constant, index } kind = Kind::constant;
    double value = 2.0; // used by constant
    double lambda_k(int k) const { return kind == Kind::constant ? value : static_cast<double>(k); }
};

// Construction parameters, kept for JSON round-trips and for the analytic
// tail handling of countable families.
struct GeneratorSpec {
    Family family = Family::doubling;
    double lambda = 0.0;       // vssv
    int dyadic_m = 2;          // dyadic
    double tail_ratio = 0.5;   // geometric_tail: a_k = (1-r) r^{k-1}
    LambdaRule lambda_rule;    // geometric_tail slopes
};

class MapModel {
public:
    static MapModel doubling(int iterate = 1);
    static MapModel dyadic(int m, int iterate = 1);
    static MapModel vssv(double lambda, int truncation = 60, int iterate = 1);
    static MapModel geometric_tail(double tail_ratio, LambdaRule rule, int truncation = 60,
                                   int iterate = 1);
    static MapModel explicit_map(std::vector<BranchSpec> branches, int iterate = 1);

    const std::vector<BranchSpec>& branches() const { return branches_; }
    const GeneratorSpec& generator() const { return gen_; }
    int truncation() const { return truncation_; }
    int iterate() const { return iterate_; }
    double tail_mass() const { return tail_mass_; }
    // branches cover (coverage_left, 1]
    double coverage_left() const { return coverage_left_; }
    bool piecewise_affine() const { return piecewise_affine_; }

    const BranchSpec& branch_at(double x) const;
    double apply(double x) const;
    double derivative(double x) const;

    // Relative partition window/xi_n. Union of cell intervals equals the
    // window minus the tail loss (reported through tail_measure).
    std::vector<Cell> cells(int n, Interval window, std::size_t cap = kDefaultCellCap,
                            double* tail_measure = nullptr) const;

    // Smallest n >= 1 with x, y in distinct cells of xi_n, kNotSeparated if
    // none found by n_max.
    int separation_time(double x, double y, int n_max) const;

    std::vector<Cell> image_components(Interval window, int n,
                                       std::size_t cap = kDefaultCellCap) const;

private:
    MapModel() = default;
    void finalize();  // sort, validate, compute coverage/tail
    static MapModel compose_iterate(const MapModel& base, int m);

    std::vector<BranchSpec> branches_;
    GeneratorSpec gen_;
    int truncation_ = 0;
    int iterate_ = 1;
    double tail_mass_ = 0.0;
    double coverage_left_ = 0.0;
    bool piecewise_affine_ = true;
};

} // namespace pexmap

#endif
