#include "semsim/stats.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace semsim::stats {

double normal_upper(double z) {
    if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
    return 0.5 * boost::math::erfc(z / std::sqrt(2.0));
}

double normal_two_sided(double z) {
    if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
    return boost::math::erfc(std::abs(z) / std::sqrt(2.0));
}

double chi2_upper(double x, double df) {
    if (df < 0.0 || std::isnan(x)) throw std::domain_error("chi2_upper: invalid arguments");
    if (x <= 0.0) return 1.0;
    if (df == 0.0) return 0.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double t_two_sided(double t, double df) {
    if (!(df > 0.0)) throw std::domain_error("t_two_sided: df must be positive");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    // P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
    const double x = df / (df + t * t);
    return boost::math::ibeta(df / 2.0, 0.5, x);
}

}  // namespace semsim::stats
