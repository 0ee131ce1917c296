#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "blindinv/rng.hpp"
#include "blindinv/signal.hpp"
#include "blindinv/wav.hpp"

using namespace blindinv;

namespace {

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / double(v.size()));
}

Signal sine(double freq, double seconds, int fs) {
  Signal x;
  x.sample_rate = fs;
  x.samples.resize(std::size_t(seconds * fs));
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    x.samples[i] = std::sin(2.0 * std::numbers::pi * freq * double(i) / fs);
  }
  return x;
}

}  // namespace

TEST_CASE("normalize_peak examples") {
  Signal x{{0.5, -0.25, 0.1}, 16000};
  Signal y = normalize_peak(x);
  CHECK(y.samples[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(y.samples[1] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(y.samples[2] == doctest::Approx(0.2).epsilon(1e-12));

  Signal neg{{-2.0, 1.0}, 16000};
  Signal yn = normalize_peak(neg);
  CHECK(yn.samples[0] == doctest::Approx(-1.0));
  CHECK(yn.samples[1] == doctest::Approx(0.5));
}

TEST_CASE("normalize_peak is idempotent and rejects silence") {
  Rng rng(7);
  Signal x;
  x.samples.resize(500);
  for (double& v : x.samples) v = rng.uniform(-0.3, 0.3);
  Signal once = normalize_peak(x);
  Signal twice = normalize_peak(once);
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    CHECK(once.samples[i] == doctest::Approx(twice.samples[i]).epsilon(1e-15));
  }
  Signal silent{std::vector<double>(10, 0.0), 16000};
  CHECK_THROWS_AS(normalize_peak(silent), DegenerateInputError);
}

TEST_CASE("preemphasize example and linearity") {
  Signal x{{1.0, 1.0, 1.0}, 16000};
  Signal y = preemphasize(x, 0.95);
  CHECK(y.samples[0] == doctest::Approx(1.0));
  CHECK(y.samples[1] == doctest::Approx(0.05));
  CHECK(y.samples[2] == doctest::Approx(0.05));

  Rng rng(3);
  Signal a, b;
  a.samples.resize(200);
  b.samples.resize(200);
  for (std::size_t i = 0; i < 200; ++i) {
    a.samples[i] = rng.uniform(-1, 1);
    b.samples[i] = rng.uniform(-1, 1);
  }
  Signal sum = a;
  for (std::size_t i = 0; i < 200; ++i) sum.samples[i] = 2.0 * a.samples[i] - 3.0 * b.samples[i];
  Signal ys = preemphasize(sum);
  Signal ya = preemphasize(a);
  Signal yb = preemphasize(b);
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(ys.samples[i] ==
          doctest::Approx(2.0 * ya.samples[i] - 3.0 * yb.samples[i]).epsilon(1e-12));
  }
}

TEST_CASE("hamming window endpoints and symmetry") {
  auto w = hamming_window(480);
  CHECK(w[0] == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(w[479] == doctest::Approx(0.08).epsilon(1e-12));
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w[i] == doctest::Approx(w[w.size() - 1 - i]).epsilon(1e-12));
    CHECK(w[i] <= 1.0 + 1e-12);
  }
  CHECK(w[240] > 0.99);
}

TEST_CASE("frame_and_window geometry") {
  Signal x;
  x.sample_rate = 16000;
  x.samples.resize(16000);  // 1 second
  for (std::size_t i = 0; i < x.samples.size(); ++i) x.samples[i] = double(i % 100) / 100.0;
  FrameSequence fr = frame_and_window(x);
  // 30 ms at 16 kHz = 480 samples, 2/3 overlap means 160-sample hop.
  CHECK(fr.frame_len == 480);
  CHECK(fr.hop == 160);
  // Frames fit while start + frame_len <= n.
  std::size_t expected = (x.size() - fr.frame_len) / fr.hop + 1;
  CHECK(fr.frames.size() == expected);
  for (const auto& f : fr.frames) CHECK(f.size() == fr.frame_len);
}

TEST_CASE("frame count property over random lengths") {
  Rng rng(11);
  for (int t = 0; t < 30; ++t) {
    std::size_t n = 100 + std::size_t(rng.uniform(0, 40000));
    Signal x;
    x.sample_rate = 16000;
    x.samples.resize(n);
    for (double& v : x.samples) v = rng.uniform(-1, 1);
    FrameSequence fr = frame_and_window(x);
    if (n < fr.frame_len) {
      CHECK(fr.frames.empty());
    } else {
      CHECK(fr.frames.size() == (n - fr.frame_len) / fr.hop + 1);
    }
  }
}

TEST_CASE("frame content matches windowed slice") {
  Signal x;
  x.sample_rate = 16000;
  x.samples.resize(2000);
  Rng rng(5);
  for (double& v : x.samples) v = rng.uniform(-1, 1);
  FrameSequence fr = frame_and_window(x);
  auto w = hamming_window(fr.frame_len);
  REQUIRE(fr.frames.size() >= 2);
  for (std::size_t f : {std::size_t(0), fr.frames.size() - 1}) {
    std::size_t start = f * fr.hop;
    for (std::size_t i = 0; i < fr.frame_len; ++i) {
      CHECK(fr.frames[f][i] == doctest::Approx(x.samples[start + i] * w[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("bandlimit_telephone attenuation") {
  const int fs = 16000;
  Signal lo = sine(50.0, 1.0, fs);
  Signal mid = sine(1000.0, 1.0, fs);
  Signal hi = sine(7000.0, 1.0, fs);
  double in_rms = rms(mid.samples);
  CHECK(rms(bandlimit_telephone(lo).samples) < 0.05 * in_rms);
  CHECK(rms(bandlimit_telephone(mid).samples) > 0.7 * in_rms);
  CHECK(rms(bandlimit_telephone(hi).samples) < 0.05 * in_rms);
}

TEST_CASE("validate rejects non-finite samples") {
  Signal bad{{0.0, std::nan("")}, 16000};
  CHECK_THROWS(validate(bad));
  Signal badrate{{0.1}, 0};
  CHECK_THROWS(validate(badrate));
}

TEST_CASE("wav round trip within quantization error") {
  Rng rng(21);
  Signal x;
  x.sample_rate = 16000;
  x.samples.resize(777);
  for (double& v : x.samples) v = rng.uniform(-0.99, 0.99);
  auto path = (std::filesystem::temp_directory_path() / "blindinv_roundtrip.wav").string();
  write_wav(path, x);
  Signal y = read_wav(path);
  std::filesystem::remove(path);
  REQUIRE(y.samples.size() == x.samples.size());
  CHECK(y.sample_rate == 16000);
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    CHECK(std::abs(y.samples[i] - x.samples[i]) <= 1.0 / 32768.0 + 1e-12);
  }
}

TEST_CASE("csv round trip is exact to printed precision") {
  Signal x{{0.125, -0.5, 0.75, 0.0}, 8000};
  auto path = (std::filesystem::temp_directory_path() / "blindinv_roundtrip.csv").string();
  write_csv(path, x);
  Signal y = read_csv(path, 8000);
  std::filesystem::remove(path);
  REQUIRE(y.samples.size() == x.samples.size());
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    CHECK(y.samples[i] == doctest::Approx(x.samples[i]).epsilon(1e-12));
  }
}
