#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pathnav/errors.hpp"
#include "pathnav/image.hpp"
#include "pathnav/image_io.hpp"
#include "testutil.hpp"

using namespace pathnav;

TEST_CASE("crop_image copies the exact rectangle") {
  Image src = testutil::random_image(64, 48, 1);
  Image cut = crop_image(src, 10, 20, 16, 8);
  CHECK(cut.width == 16);
  CHECK(cut.height == 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 16; ++x) {
      CHECK(cut.at(x, y) == src.at(10 + x, 20 + y));
    }
  }
  CHECK_THROWS_AS(crop_image(src, 60, 0, 16, 8), Error);
}

TEST_CASE("resize keeps a constant image constant") {
  Image src(333, 177, {120, 45, 200});
  for (auto [w, h] : {std::pair{100, 100}, {500, 80}, {333, 177}, {1, 1}}) {
    Image out = resize_image(src, w, h);
    for (std::size_t i = 0; i < out.data.size(); i += 3) {
      CHECK(out.data[i] == 120);
      CHECK(out.data[i + 1] == 45);
      CHECK(out.data[i + 2] == 200);
    }
  }
}

TEST_CASE("resize to the same size is the identity") {
  Image src = testutil::random_image(97, 55, 2);
  CHECK(resize_image(src, 97, 55) == src);
}

TEST_CASE("integer 2x area shrink averages each 2x2 block") {
  Image src = testutil::random_image(64, 64, 3);
  Image out = resize_image(src, 32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      for (int c = 0; c < 3; ++c) {
        double mean = (src.px(2 * x, 2 * y)[c] + src.px(2 * x + 1, 2 * y)[c] +
                       src.px(2 * x, 2 * y + 1)[c] +
                       src.px(2 * x + 1, 2 * y + 1)[c]) /
                      4.0;
        CHECK(std::abs(out.px(x, y)[c] - mean) <= 1.0);
      }
    }
  }
}

TEST_CASE("bilinear enlarge interpolates between neighbors") {
  Image src(2, 1);
  src.set(0, 0, {0, 0, 0});
  src.set(1, 0, {200, 200, 200});
  Image out = resize_image(src, 4, 1);
  CHECK(out.px(0, 0)[0] == 0);
  CHECK(out.px(3, 0)[0] == 200);
  CHECK(out.px(1, 0)[0] > 0);
  CHECK(out.px(2, 0)[0] > out.px(1, 0)[0]);
  CHECK(out.px(2, 0)[0] < 200);
}

TEST_CASE("png round-trips bit-exactly") {
  Image src = testutil::random_image(81, 37, 4);
  auto bytes = encode_png(src);
  Image back = decode_png(bytes.data(), bytes.size());
  CHECK(back == src);
}

TEST_CASE("png encoding is deterministic") {
  Image src = testutil::random_image(40, 40, 5);
  CHECK(encode_png(src) == encode_png(src));
}

TEST_CASE("tiff round-trips bit-exactly") {
  Image src = testutil::random_image(33, 57, 6);
  auto bytes = encode_tiff(src);
  Image back = decode_tiff(bytes.data(), bytes.size());
  CHECK(back == src);
}

TEST_CASE("decode_image sniffs the container") {
  Image src = testutil::random_image(12, 9, 7);
  CHECK(decode_image(encode_png(src)) == src);
  CHECK(decode_image(encode_tiff(src)) == src);
  std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK_THROWS_AS(decode_image(junk), Error);
}

TEST_CASE("corrupt png raises UnreadableRaster") {
  Image src = testutil::random_image(16, 16, 8);
  auto bytes = encode_png(src);
  bytes.resize(bytes.size() / 2);
  try {
    decode_png(bytes.data(), bytes.size());
    FAIL("expected a decode failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unreadable_raster);
  }
}
