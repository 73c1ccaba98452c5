// Block-size scan of the critical XX chain next to the gapped XY chain.

#include <cstdio>

#include "singlecopy/singlecopy.hpp"

int main() {
  using namespace singlecopy;
  const auto grid = geometric_grid(16, 512, 1);
  const ScanSeries xx = scan(make_xx(2.0), grid);
  const ScanSeries xy = scan(make_xy(2.0, 0.5), grid);

  std::printf("%6s %14s %14s %14s %14s\n", "L", "xx e1_cont", "xx S", "xy e1_cont", "xy S");
  for (std::size_t i = 0; i < grid.size(); ++i)
    std::printf("%6ld %14.6f %14.6f %14.6f %14.6f\n", grid[i], xx.rows[i].e1_cont_bits, xx.rows[i].entropy_bits,
                xy.rows[i].e1_cont_bits, xy.rows[i].entropy_bits);

  const ScalingFit e1 = fit_log(xx, Quantity::e1_cont_bits);
  const ScalingFit s = fit_log(xx, Quantity::entropy_bits);
  std::printf("xx slopes per log2 L: e1_cont %.4f, entropy %.4f\n", e1.slope, s.slope);
}
