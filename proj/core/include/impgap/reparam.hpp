#pragma once

// Arc-length embedding of strict processes into extended ones, its inverse,
// canonical rescaling, the d-infinity distance and the no-drift
// strictification.

#include "impgap/dynamics.hpp"
#include "impgap/model.hpp"
#include "impgap/process.hpp"

#include <stdexcept>

namespace impgap {

class NotEmbeddedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// s_k = sigma(tau_k) with sigma' = 1 + |du|; (w0, w) = (1, du) / (1 + |du|).
ExtendedProcess embed(const StrictProcess& sp);

/// Requires every w0_k > 0; du_k = w_k / w0_k on tau_k = y0(s_k).
StrictProcess invert_embedding(const ExtendedProcess& ep);

/// Divides each interval's controls by lambda_k = w0_k + |w_k| and multiplies
/// its duration by lambda_k.
ControlSequence arc_normalize(const ControlSequence& c);

double d_infty(const StrictProcess& a, const StrictProcess& b);
double d_infty(const ExtendedProcess& a, const ExtendedProcess& b);

class NoDriftError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replaces the time component by (1 - blend) phi0 + blend (affine phi0_hat),
/// reparameterizes and re-integrates. blend = 1 is the construction for
/// driftless problems; blend < 1 keeps the result closer to ep in d-infinity.
StrictProcess no_drift_strictify(const ProblemSpec& p, const ExtendedProcess& ep, double blend = 1.0,
                                 const IntegrationOptions& opt = {});

}  // namespace impgap
