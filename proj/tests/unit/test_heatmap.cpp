#include <filesystem>

#include <gtest/gtest.h>

#include "spdc/heatmap.hpp"

using namespace spdc;

namespace {

DensityMatrix gaussian_blob(double center_nm, double width_nm) {
  DensityMatrix rho;
  std::tie(rho.omega, rho.weights) = output_grid({760, 840, 17});
  const int n = rho.size();
  rho.values = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const double a = rho.wavelength_nm(j) - center_nm, b = rho.wavelength_nm(k) - center_nm;
      rho.values(j, k) = std::exp(-(a * a + b * b) / (2 * width_nm * width_nm));
    }
  return rho;
}

}  // namespace

TEST(DivergingColor, EndpointsAndCenter) {
  EXPECT_EQ(diverging_color(0.0), (std::array<std::uint8_t, 3>{247, 247, 247}));
  EXPECT_EQ(diverging_color(1.0), (std::array<std::uint8_t, 3>{180, 4, 38}));
  EXPECT_EQ(diverging_color(-1.0), (std::array<std::uint8_t, 3>{59, 76, 192}));
  EXPECT_EQ(diverging_color(3.0), diverging_color(1.0));
}

TEST(Heatmap, SymmetricScaleAndOrientation) {
  DensityMatrix rho = gaussian_blob(800, 10);
  HeatmapOptions opt;
  opt.plot_size = 160;
  const Image img = render_heatmap(rho, opt);
  EXPECT_GT(img.width, opt.plot_size);
  EXPECT_GT(img.height, opt.plot_size);
  // The maximum of Re rho maps to the saturated positive color.
  bool saturated = false;
  for (int y = 0; y < img.height && !saturated; ++y)
    for (int x = 0; x < img.width && !saturated; ++x)
      saturated = img.at(x, y) == diverging_color(1.0);
  EXPECT_TRUE(saturated);

  rho.values = -rho.values;
  const Image flipped = render_heatmap(rho, opt);
  EXPECT_LT(structural_similarity(img, flipped), 0.99);
}

TEST(Png, RoundTrip) {
  const Image img = render_heatmap(gaussian_blob(800, 10));
  const auto path = (std::filesystem::temp_directory_path() / "spdc_heatmap_test.png").string();
  write_png(path, img);
  const Image back = read_png(path);
  EXPECT_EQ(back.width, img.width);
  EXPECT_EQ(back.height, img.height);
  EXPECT_EQ(back.rgb, img.rgb);
  EXPECT_THROW(read_png(path + ".missing"), ConfigError);
}

TEST(StructuralSimilarity, IdentityAndSensitivity) {
  const Image a = render_heatmap(gaussian_blob(800, 10));
  const Image b = render_heatmap(gaussian_blob(815, 10));
  EXPECT_DOUBLE_EQ(structural_similarity(a, a), 1.0);
  EXPECT_LT(structural_similarity(a, b), 0.95);
  EXPECT_GT(structural_similarity(a, render_heatmap(gaussian_blob(800.5, 10))), 0.95);
  EXPECT_THROW(structural_similarity(a, Image(3, 3)), ContractViolation);
}
