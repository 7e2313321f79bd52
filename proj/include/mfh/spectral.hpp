#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mfh/model.hpp"
#include "mfh/numerics.hpp"

namespace mfh {

// Laplace transforms of the constant-current kernels and the derived
// stability function 1 - J(alpha) Theta_hat(z). Toy parameters evaluate in
// closed form; smooth models go through tabulated kernels with Filon-type
// transforms and an analytic exponential tail.
class TransformContext {
  public:
    TransformContext(const ModelSpec& model, double alpha);

    Complex laplace_H(Complex z) const;   // int e^{-zt} H_alpha(t) dt
    Complex k_hat(Complex z) const;       // int e^{-zt} K_alpha(t) dt
    Complex psi_hat(Complex z) const;
    Complex theta_hat(Complex z) const;   // z psi_hat (1 + K/(1-K)), removable at 0
    Complex stability_function(Complex z) const;  // 1 - J(alpha) theta_hat(z)

    double alpha() const { return alpha_; }
    double gamma() const { return gamma_; }
    double J() const { return J_; }
    double domain_re_min() const { return -f_sigma_; }

  private:
    struct Tables;
    ModelSpec model_;
    double alpha_ = 0.0;
    bool toy_ = false;
    double beta_ = 0.0, tstar_ = 0.0, sigma_ = 0.0;
    double gamma_ = 0.0, J_ = 0.0;
    double f_sigma_ = 0.0;  // transform abscissa bound
    std::shared_ptr<const Tables> tables_;  // smooth models only
};

Complex laplace_H(const ModelSpec& model, double alpha, Complex z);
Complex psi_hat(const ModelSpec& model, double alpha, Complex z);
Complex theta_hat(const ModelSpec& model, double alpha, Complex z);

// -sup Re of the zeros of H_hat in the transform domain (decay rate of the
// centered jump rate).
double lambda_star_estimate(const ModelSpec& model, double alpha);

// ---------------------------------------------------------------------------
// complex root location by the argument principle
// ---------------------------------------------------------------------------

struct Rect {
    double re_lo = -1.0, re_hi = 2.0;
    double im_lo = -40.0, im_hi = 40.0;
};

struct WindingOptions {
    int max_depth = 60;
    double min_box = 1e-7;
    double polish_tol = 1e-11;
    // base boundary samples per unit length; guards the argument tracking
    // against aliasing a full phase turn between samples
    double samples_per_unit = 8.0;
    bool parallel = true;
};

// All roots of F inside the rectangle, by adaptive winding-number subdivision
// plus Newton polishing. F must be holomorphic on the closed rectangle.
std::vector<Complex> find_roots_winding(const std::function<Complex(Complex)>& F,
                                        const Rect& rect, const WindingOptions& opts = {});

// ---------------------------------------------------------------------------
// verdict
// ---------------------------------------------------------------------------

enum class Stability { Stable, Unstable, Marginal };

struct SpectralReport {
    double alpha = 0.0;
    double J_at_alpha = 0.0;
    double lambda_star = 0.0;
    std::vector<Complex> roots;
    Stability verdict = Stability::Stable;
    Complex marginal_root;  // the + imaginary member of the pair when Marginal
    Rect searched;
    double margin = 1e-7;
};

struct VerdictOptions {
    Rect rect;              // im_hi/lo used; re bounds derived when nan
    bool rect_given = false;
    double margin = 1e-7;
};

SpectralReport stability_verdict(const ModelSpec& model, double alpha,
                                 const VerdictOptions& opts = {});

}  // namespace mfh
