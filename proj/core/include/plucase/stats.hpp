#ifndef PLUCASE_STATS_HPP
#define PLUCASE_STATS_HPP

namespace plucase::stats {

// Complementary error function: Maclaurin series of erf for small
// arguments, Lentz-evaluated continued fraction for large ones.
double erfc(double x);

// Standard normal distribution function via erfc.
double normal_cdf(double z);

}  // namespace plucase::stats

#endif
