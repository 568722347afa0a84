#pragma once

namespace foliage::tol {

// Fixed numeric parameters of the library. Double precision trade-offs;
// the verification routines report residuals against these.
inline constexpr double fd_step = 1e-4;          // finite-difference step
inline constexpr double fd_agree = 1e-6;         // symbolic vs FD agreement
inline constexpr double inverse = 1e-9;          // declared-inverse contract
inline constexpr double ellipticity = 1e-8;      // |symbol| threshold on the sphere
inline constexpr double triangular = 1e-10;      // off-diagonal threshold
inline constexpr double orbit_dedup = 1e-6;      // orbit point resolution
inline constexpr double matrix_dedup = 1e-9;     // germ Jacobian resolution
inline constexpr double equicont_slack = 1e-9;   // allowed Lipschitz overshoot
inline constexpr int closure_max_elements = 10000;
inline constexpr int haar_nodes = 64;            // per torus block
inline constexpr size_t frontier_cap = 1000000;  // BFS safety valve

}  // namespace foliage::tol
