#include <cmath>
#include <limits>

#include "imsim/detect.hpp"

namespace imsim {

// Space-time block decoding per subcarrier: slot 1 carries (s1, s2), slot 2
// carries (-s2*, s1*). Matched-filter combining turns each symbol into
// sum_{r,t} |h_rt|^2 * s_i plus noise, after which per-symbol ML detection is
// a scaled nearest-point search.
AlamoutiDecision alamouti_detect(const Eigen::VectorXcd& y_slot1,
                                 const Eigen::VectorXcd& y_slot2,
                                 const Eigen::MatrixXcd& h,
                                 const Constellation& c) {
  if (h.cols() != 2) throw ConfigError("alamouti combining needs T = 2");
  const Eigen::Index n_rx = h.rows();

  cplx s1{0.0, 0.0};
  cplx s2{0.0, 0.0};
  double heff = 0.0;
  for (Eigen::Index r = 0; r < n_rx; ++r) {
    const cplx h1 = h(r, 0);
    const cplx h2 = h(r, 1);
    s1 += std::conj(h1) * y_slot1(r) + h2 * std::conj(y_slot2(r));
    s2 += std::conj(h2) * y_slot1(r) - h1 * std::conj(y_slot2(r));
    heff += std::norm(h1) + std::norm(h2);
  }

  AlamoutiDecision d;
  double best1 = std::numeric_limits<double>::infinity();
  double best2 = std::numeric_limits<double>::infinity();
  for (int m = 0; m < c.order(); ++m) {
    const cplx ref = heff * c.point(m);
    if (double v = std::norm(s1 - ref); v < best1) {
      best1 = v;
      d.label1 = m;
    }
    if (double v = std::norm(s2 - ref); v < best2) {
      best2 = v;
      d.label2 = m;
    }
  }
  return d;
}

}  // namespace imsim
