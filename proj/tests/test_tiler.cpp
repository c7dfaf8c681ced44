#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pathnav/tiler.hpp"
#include "testutil.hpp"

using namespace pathnav;

TEST_CASE("exact-fit slide yields one region") {
  TilingPlan plan = plan_regions(16000, 16000);
  CHECK(plan.stride == 15200);
  REQUIRE(plan.specs.size() == 1);
  CHECK(plan.specs[0].x == 0);
  CHECK(plan.specs[0].w == 16000);
  CHECK(plan.specs[0].h == 16000);
}

TEST_CASE("31200 square tiles into a 2x2 grid at stride 15200") {
  TilingPlan plan = plan_regions(31200, 31200);
  REQUIRE(plan.specs.size() == 4);
  CHECK(plan.specs[0].x == 0);
  CHECK(plan.specs[1].x == 15200);
  CHECK(plan.specs[1].y == 0);
  CHECK(plan.specs[2].x == 0);
  CHECK(plan.specs[2].y == 15200);
  for (const RegionSpec& spec : plan.specs) {
    CHECK(spec.w == 16000);
    CHECK(spec.h == 16000);
  }
  // row-major contiguous ids from 0
  for (std::size_t i = 0; i < plan.specs.size(); ++i) {
    CHECK(plan.specs[i].region_id == (long long)i);
  }
}

TEST_CASE("47600 gives four positions with the last clamped") {
  TilingPlan plan = plan_regions(47600, 16000);
  REQUIRE(plan.specs.size() == 4);
  CHECK(plan.specs[0].x == 0);
  CHECK(plan.specs[1].x == 15200);
  CHECK(plan.specs[2].x == 30400);
  CHECK(plan.specs[3].x == 31600);  // 47600 - 16000
}

TEST_CASE("small slide yields one clamped region") {
  TilingPlan plan = plan_regions(900, 700);
  REQUIRE(plan.specs.size() == 1);
  CHECK(plan.specs[0].w == 900);
  CHECK(plan.specs[0].h == 700);
}

TEST_CASE("invalid overlap is rejected") {
  CHECK_THROWS_AS(plan_regions(100, 100, 16000, 1.0), Error);
  CHECK_THROWS_AS(plan_regions(100, 100, 16000, -0.1), Error);
  try {
    plan_regions(100, 100, 16000, 2.0);
    FAIL("expected InvalidOverlap");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_overlap);
  }
}

TEST_CASE("coverage and overlap-band properties for the default geometry") {
  TilingPlan plan = plan_regions(47600, 31200);
  CHECK(plan.stride == 15200);
  CHECK(16000 - plan.stride == 800);

  // every axis coordinate is covered and interior band pixels sit in 2 regions
  auto covered_count = [&](long long x, long long y) {
    int count = 0;
    for (const RegionSpec& spec : plan.specs) {
      if (x >= spec.x && x < spec.x + spec.w && y >= spec.y && y < spec.y + spec.h) {
        ++count;
      }
    }
    return count;
  };
  CHECK(covered_count(0, 0) == 1);
  CHECK(covered_count(47599, 31199) >= 1);
  CHECK(covered_count(15600, 100) == 2);    // inside the first x band
  CHECK(covered_count(15600, 15600) == 4);  // corner band
  CHECK(covered_count(8000, 8000) == 1);

  // monotone: widening the slide never decreases the region count
  std::size_t last = 0;
  for (long long w = 1; w < 70000; w += 3700) {
    std::size_t n = plan_regions(w, 1).specs.size();
    CHECK(n >= last);
    last = n;
  }
}

TEST_CASE("tissue_fraction spec examples") {
  Image white(64, 64, {255, 255, 255});
  CHECK(tissue_fraction(white) == 0.0);

  Image magenta(64, 64, {200, 0, 200});
  CHECK(tissue_fraction(magenta) == 1.0);

  Image half = testutil::quadrant_image(64, 64, {255, 255, 255}, {200, 0, 200},
                                        {255, 255, 255}, {200, 0, 200});
  CHECK(tissue_fraction(half) == doctest::Approx(0.5).epsilon(0.001));
}

TEST_CASE("filter_regions keeps only tissue-bearing specs without renumbering") {
  testutil::TempDir dir;
  // white slide with one stained block confined to the second region column
  Image base(1900, 1000, {255, 255, 255});
  for (int y = 300; y < 700; ++y) {
    for (int x = 1100; x < 1700; ++x) base.set(x, y, {190, 40, 150});
  }
  auto manifest = testutil::write_pyramid(dir.path, base, {1}, "stain");
  SlidePyramid pyramid = load_pyramid(manifest);

  TilingPlan plan = plan_regions(1900, 1000, 1000, 0.05);
  plan.slide_id = "stain";
  REQUIRE(plan.specs.size() == 2);  // x positions {0, 900}

  TilingPlan kept = filter_regions(plan, pyramid, 0.10);
  REQUIRE(kept.specs.size() == 1);
  CHECK(kept.specs[0].region_id == 1);  // provenance preserved
  CHECK(kept.specs[0].tissue_fraction.has_value());
  CHECK(*kept.specs[0].tissue_fraction > 0.10);

  // all-background slide: nothing kept
  Image blank(1900, 1000, {255, 255, 255});
  testutil::TempDir dir2;
  SlidePyramid empty = load_pyramid(
      testutil::write_pyramid(dir2.path, blank, {1}, "blank"));
  CHECK(filter_regions(plan, empty, 0.10).specs.empty());

  // min_tissue 0 keeps everything (strict > on fraction 0? background is 0)
  TilingPlan all = filter_regions(plan, pyramid, -0.0001);
  CHECK(all.specs.size() == 2);

  // idempotent and subset
  TilingPlan again = filter_regions(kept, pyramid, 0.10);
  CHECK(again.specs.size() == kept.specs.size());
  CHECK(again.specs[0].region_id == kept.specs[0].region_id);
}

TEST_CASE("extract_region copies base pixels with provenance") {
  testutil::TempDir dir;
  Image base = testutil::random_image(600, 400, 21);
  SlidePyramid pyramid =
      load_pyramid(testutil::write_pyramid(dir.path, base, {1}, "extract"));

  RegionSpec whole{0, 0, 0, 600, 400, {}};
  RegionImage region = extract_region(pyramid, whole);
  CHECK(region.pixels == base);
  CHECK(region.slide_id == "extract");

  // adjacent specs share a bit-identical overlap band (second region is
  // clamped to 600 - 320 = 280, so the band is 40 px wide)
  TilingPlan plan = plan_regions(600, 400, 320, 0.05);  // stride 304
  RegionImage a = extract_region(pyramid, plan.specs[0]);
  RegionImage b = extract_region(pyramid, plan.specs[1]);
  long long band = plan.specs[0].x + plan.specs[0].w - plan.specs[1].x;
  CHECK(band == 40);
  for (int y = 0; y < a.pixels.height; ++y) {
    for (int i = 0; i < band; ++i) {
      CHECK(a.pixels.at(int(plan.specs[1].x - plan.specs[0].x) + i, y) ==
            b.pixels.at(i, y));
    }
  }

  RegionSpec outside{9, 500, 300, 200, 200, {}};
  try {
    extract_region(pyramid, outside);
    FAIL("expected OutOfBounds");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::out_of_bounds);
  }
}

TEST_CASE("region manifest round-trips") {
  TilingPlan plan = plan_regions(31200, 16000);
  plan.slide_id = "m";
  plan.specs[1].tissue_fraction = 0.25;
  std::string jsonl = region_manifest_jsonl(plan);
  testutil::TempDir dir;
  write_text_file(dir.path / "regions.jsonl", jsonl);
  TilingPlan back = load_region_manifest(dir.path / "regions.jsonl");
  REQUIRE(back.specs.size() == plan.specs.size());
  CHECK(back.slide_id == "m");
  CHECK(back.specs[1].x == plan.specs[1].x);
  CHECK(back.specs[1].tissue_fraction == 0.25);
  CHECK(!back.specs[0].tissue_fraction.has_value());
}
