#pragma once

// Block description of a discrete-time two-dimensional QBD process.
//
// Phases are 0-indexed. Block indices follow the jump in each coordinate:
// interior(i, j) is the block for a jump (i, j) with i, j in {-1, 0, 1};
// face1 (x2 = 0) has i in {-1, 0, 1}, j in {0, 1}; face2 (x1 = 0) has
// i in {0, 1}, j in {-1, 0, 1}; origin has i, j in {0, 1}.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qbd/linalg.hpp"

namespace qbd {

enum class Family { Interior, Face1, Face2, Origin };

std::string_view family_name(Family f);

class QbdModel {
public:
    using InteriorBlocks = std::array<std::array<Matrix, 3>, 3>;  // [i+1][j+1]
    using Face1Blocks = std::array<std::array<Matrix, 2>, 3>;     // [i+1][j]
    using Face2Blocks = std::array<std::array<Matrix, 3>, 2>;     // [i][j+1]
    using OriginBlocks = std::array<std::array<Matrix, 2>, 2>;    // [i][j]

    /// Checks shapes only (every block s0 x s0); value checks live in validate().
    QbdModel(std::size_t s0, InteriorBlocks interior, Face1Blocks face1, Face2Blocks face2,
             OriginBlocks origin);

    std::size_t phases() const { return s0_; }

    const Matrix& interior(int i, int j) const { return interior_[i + 1][j + 1]; }
    const Matrix& face1(int i, int j) const { return face1_[i + 1][j]; }
    const Matrix& face2(int i, int j) const { return face2_[i][j + 1]; }
    const Matrix& origin(int i, int j) const { return origin_[i][j]; }

    /// Same process with the roles of x1 and x2 exchanged. Everything stated
    /// for the x2-direction (G2, psi2, the face-2 drift, ...) is the x1-direction
    /// quantity of the swapped model.
    QbdModel swapped() const;

    /// Same process with phases relabelled: new phase p[k] is old phase k.
    QbdModel permuted(const std::vector<std::size_t>& p) const;

    bool operator==(const QbdModel&) const = default;

private:
    std::size_t s0_;
    InteriorBlocks interior_;
    Face1Blocks face1_;
    Face2Blocks face2_;
    OriginBlocks origin_;
};

/// Sum of all blocks of one family (A_{*,*} etc.).
Matrix family_sum(const QbdModel& m, Family f);

/// A_{*,j}(z) = sum_i A_{i,j} z^i, the x1-aggregated interior block for an x2-jump j.
Matrix interior_col_poly(const QbdModel& m, int j, double z);
/// A^{(1)}_{*,j}(z) = sum_i A^{(1)}_{i,j} z^i for j in {0, 1}.
Matrix face1_col_poly(const QbdModel& m, int j, double z);

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> notes;
    bool ok() const { return violations.empty(); }
};

/// Nonnegativity, stochasticity of the four family sums, irreducibility and
/// aperiodicity of A_{*,*}, and a heuristic reachability check of the three
/// boundary-removed chains on a 5 x 5 quotient window (free coordinates wrap
/// around, the reflected coordinate keeps levels 0..3 and lumps levels >= 4).
/// The window check is a necessary condition only and is reported as heuristic.
ValidationReport validate(const QbdModel& m, double stochastic_tol = 1e-12);

/// Parameters of the single-server two-queue polling model with 1-limited
/// service at queue 1 and K-limited service at queue 2.
struct LimitedServiceParams {
    int K = 1;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;

    double uniformization() const { return lambda1 + lambda2 + mu1 + mu2; }
};

/// The (K+1)-phase uniformized model. Throws InputError for K < 1 or nonpositive rates.
QbdModel build_limited_service(const LimitedServiceParams& p);

/// JSON model file: {"s0", "A", "A1", "A2", "A0"}; numbers written with 17 significant digits.
std::string save_model(const QbdModel& m);
/// Throws InputError naming the offending field.
QbdModel load_model(std::string_view text);

QbdModel load_model_file(const std::string& path);
void save_model_file(const QbdModel& m, const std::string& path);

}  // namespace qbd
