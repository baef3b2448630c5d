#include <doctest.h>

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "ringtower/data_model.hpp"
#include "ringtower/image_io.hpp"
#include "temp_dir.hpp"

using namespace ringtower;
using testing_support::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

Segmentation simple_segmentation() {
  Segmentation seg;
  seg.source_id = "visit";
  seg.segments = {{TowerId::RV, 0, 9, {0, 0, 8, 8}, std::nullopt},
                  {TowerId::LH, 10, 19, {0, 0, 8, 8}, 4},
                  {TowerId::LV, 20, 29, {0, 0, 8, 8}, std::nullopt},
                  {TowerId::RH, 30, 39, {0, 0, 8, 8}, 3}};
  return seg;
}

}  // namespace

TEST_CASE("input errors name the artifact and index") {
  InputError e("timestamps", "non-increasing timestamp", 7);
  CHECK(std::string(e.what()) == "timestamps: non-increasing timestamp (index 7)");
  CHECK(e.artifact() == "timestamps");
  CHECK(e.index() == 7);
  CHECK(std::string(InputError("labels", "bad").what()) == "labels: bad");
}

TEST_CASE("frame sequence invariants") {
  RgbImage img(4, 3);
  SUBCASE("valid") {
    FrameSequence seq({{0, 0.0, img}, {1, 0.03, img}}, "x");
    CHECK(seq.size() == 2);
    CHECK(seq.timestamps() == std::vector<double>{0.0, 0.03});
  }
  SUBCASE("non-contiguous indices") {
    CHECK_THROWS_AS(FrameSequence({{0, 0.0, img}, {2, 0.03, img}}, "x"), InputError);
  }
  SUBCASE("equal timestamps") {
    CHECK(error_of([&] { FrameSequence({{0, 0.5, img}, {1, 0.5, img}}, "x"); }) ==
          "timestamps: non-increasing timestamp (index 1)");
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(FrameSequence({{0, 0.0, img}, {1, 0.1, RgbImage(3, 3)}}, "x"), InputError);
  }
}

TEST_CASE("timestamps file") {
  TempDir dir;
  SUBCASE("missing file") {
    CHECK(error_of([&] { load_timestamps(dir / "nope.csv"); }) == "timestamps: not found");
  }
  SUBCASE("wrong header") {
    write(dir / "t.csv", "index,time\n0,0\n");
    CHECK_THROWS_AS(load_timestamps(dir / "t.csv"), InputError);
  }
  SUBCASE("non-increasing") {
    write(dir / "t.csv", "frame_index,timestamp_s\n0,1.0\n1,0.5\n");
    CHECK(error_of([&] { load_timestamps(dir / "t.csv"); }) ==
          "timestamps: non-increasing timestamp (index 1)");
  }
  SUBCASE("out of sequence index") {
    write(dir / "t.csv", "frame_index,timestamp_s\n0,1.0\n2,1.5\n");
    CHECK_THROWS_AS(load_timestamps(dir / "t.csv"), InputError);
  }
  SUBCASE("round trip is exact") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const auto ts = oracle::random_timestamps(rng, 1 + trial * 7);
      save_timestamps(ts, dir / "t.csv");
      CHECK(load_timestamps(dir / "t.csv") == ts);
    }
  }
}

TEST_CASE("frames directory") {
  TempDir dir;
  std::filesystem::create_directories(dir / "visit" / "frames");
  const auto frames = dir.path() / "visit" / "frames";
  RgbImage img(5, 4, Rgb{1, 2, 3});
  img(2, 1) = Rgb{200, 100, 50};
  for (int i = 0; i < 3; ++i) write_png(img, frames / frame_filename(i));
  save_timestamps({0.0, 0.03, 0.061}, dir / "t.csv");

  SUBCASE("loads pixels and source id") {
    const FrameSequence seq = load_frames(frames, dir / "t.csv");
    CHECK(seq.size() == 3);
    CHECK(seq[1].pixels == img);
    CHECK(seq.source_id() == "visit");
    CHECK(seq.timestamp(2) == 0.061);
  }
  SUBCASE("missing frame file") {
    std::filesystem::remove(frames / frame_filename(1));
    CHECK(error_of([&] { load_frames(frames, dir / "t.csv"); }) == "frames: missing frame file (index 1)");
  }
  SUBCASE("extra frame file") {
    write_png(img, frames / frame_filename(3));
    CHECK_THROWS_AS(load_frames(frames, dir / "t.csv"), InputError);
  }
  SUBCASE("missing timestamps reported first") {
    CHECK(error_of([&] { load_frames(dir / "nowhere", dir / "none.csv"); }) == "timestamps: not found");
  }
  CHECK(frame_filename(42) == "frame_000042.png");
}

TEST_CASE("segmentation validation") {
  Segmentation seg = simple_segmentation();
  CHECK_NOTHROW(validate_segmentation(seg));
  CHECK_NOTHROW(validate_segmentation(seg, 40, 8, 8));

  SUBCASE("tower order") {
    std::swap(seg.segments[0], seg.segments[1]);
    CHECK(error_of([&] { validate_segmentation(seg); }).find("wrong tower order") != std::string::npos);
  }
  SUBCASE("overlap") {
    seg.segments[1].start_frame = 9;
    CHECK(error_of([&] { validate_segmentation(seg); }).find("overlapping segments") != std::string::npos);
  }
  SUBCASE("end zone required on horizontal towers") {
    seg.segments[3].end_zone_x.reset();
    CHECK_THROWS_AS(validate_segmentation(seg), InputError);
  }
  SUBCASE("end zone rejected on vertical towers") {
    seg.segments[0].end_zone_x = 2;
    CHECK_THROWS_AS(validate_segmentation(seg), InputError);
  }
  SUBCASE("start must precede end") {
    seg.segments[2].end_frame = seg.segments[2].start_frame;
    CHECK_THROWS_AS(validate_segmentation(seg), InputError);
  }
  SUBCASE("crash spanning two segments") {
    seg.crashes.push_back({8, 12});
    CHECK_THROWS_AS(validate_segmentation(seg), InputError);
  }
  SUBCASE("frame bounds") {
    CHECK_THROWS_AS(validate_segmentation(seg, 39, 8, 8), InputError);
    CHECK_THROWS_AS(validate_segmentation(seg, 40, 7, 8), InputError);
  }
  CHECK(seg.segment(TowerId::LV).start_frame == 20);
}

TEST_CASE("segmentation file round trip on random instances") {
  TempDir dir;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 0;
    const Segmentation seg = oracle::random_segmentation(rng, n);
    save_segmentation(seg, dir / "s.json");
    CHECK(load_segmentation(dir / "s.json") == seg);
  }
}

TEST_CASE("segmentation file rejects unknown fields and versions") {
  TempDir dir;
  const std::string good = segmentation_to_json(simple_segmentation());
  write(dir / "s.json", good);
  CHECK_NOTHROW(load_segmentation(dir / "s.json"));

  std::string extra = good;
  extra.insert(1, "\"colour\": 3,");
  write(dir / "s.json", extra);
  CHECK(error_of([&] { load_segmentation(dir / "s.json"); }).find("unknown field 'colour'") != std::string::npos);

  std::string version = good;
  version.replace(version.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
  write(dir / "s.json", version);
  CHECK_THROWS_AS(load_segmentation(dir / "s.json"), InputError);

  write(dir / "s.json", "{ not json");
  CHECK_THROWS_AS(load_segmentation(dir / "s.json"), InputError);
}

TEST_CASE("detector config defaults") {
  const DetectorConfig c;
  CHECK(c.hue_min == 70);
  CHECK(c.hue_max == 130);
  CHECK(c.sat_min == 90);
  CHECK(c.val_max == 120);
  CHECK(c.min_blob_px == 100);
  CHECK(c.ma_window == 5);
  CHECK(c.stft_window == 3);
  CHECK(c.db_threshold == 20.0);
  CHECK(c.head_frames == 10);
  CHECK(c.head_confirm == 5);
  CHECK(c.merge_gap == 10);
  CHECK(c.lone_window == 5);
  CHECK(c.tail_frames == 10);
  CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("detector config validation and round trip") {
  TempDir dir;
  DetectorConfig c;
  c.ma_window = 4;
  CHECK_THROWS_AS(validate_config(c), InputError);
  c = {};
  c.hue_min = 150;
  c.hue_max = 20;
  CHECK_THROWS_AS(validate_config(c), InputError);
  c = {};
  c.stft_window = 1;
  CHECK_THROWS_AS(validate_config(c), InputError);

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const DetectorConfig r = oracle::random_config(rng);
    save_config(r, dir / "c.json");
    CHECK(load_config(dir / "c.json") == r);
  }

  write(dir / "partial.json", "{\"schema_version\": 1, \"merge_gap\": 7}");
  DetectorConfig expected;
  expected.merge_gap = 7;
  CHECK(load_config(dir / "partial.json") == expected);

  write(dir / "typo.json", "{\"schema_version\": 1, \"merge_gaps\": 7}");
  CHECK_THROWS_AS(load_config(dir / "typo.json"), InputError);
}

TEST_CASE("intervals from frames and back") {
  CHECK(intervals_from_frames({5, 3, 4, 9, 9, 10}) == std::vector<Interval>{{3, 5}, {9, 10}});
  CHECK(intervals_from_frames({}).empty());
  CHECK(frames_of({{3, 5}, {9, 10}}) == std::vector<int>{3, 4, 5, 9, 10});

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> frames;
    for (int f = 0; f < 80; ++f)
      if (std::bernoulli_distribution(0.3)(rng)) frames.push_back(f);
    const auto ivs = intervals_from_frames(frames);
    CHECK(frames_of(ivs) == frames);
    CHECK_NOTHROW(validate_intervals(ivs, "RV"));
  }
}

TEST_CASE("label invariants") {
  CHECK_NOTHROW(validate_intervals({{1, 2}, {4, 4}}, "RV"));
  CHECK_THROWS_AS(validate_intervals({{1, 2}, {3, 4}}, "RV"), InputError);  // abutting
  CHECK_THROWS_AS(validate_intervals({{4, 5}, {1, 2}}, "RV"), InputError);  // unsorted
  CHECK_THROWS_AS(validate_intervals({{5, 4}}, "RV"), InputError);

  const Segmentation seg = simple_segmentation();
  ErrorIntervalSet labels;
  labels.of(TowerId::LH) = {{12, 14}, {13, 16}, {25, 26}};
  const auto v = label_violations(labels, &seg);
  REQUIRE(v.size() == 2);
  CHECK(v[0].tower == TowerId::LH);
  CHECK(v[0].indices == std::vector<long>{0, 1});
  CHECK(v[1].indices == std::vector<long>{2});
  CHECK(v[1].message == "interval outside segment");
  CHECK_THROWS_AS(validate_labels(labels, seg), InputError);
  CHECK(label_violations(labels, nullptr).size() == 1);
}

TEST_CASE("labels document") {
  TempDir dir;
  SUBCASE("random round trip") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 300; ++trial) {
      int n = 0;
      const Segmentation seg = oracle::random_segmentation(rng, n);
      const ErrorIntervalSet labels = oracle::random_labels(rng, seg);
      save_labels(labels, dir / "l.json");
      CHECK(load_labels(dir / "l.json", seg) == labels);
      CHECK(labels_from_json(labels_to_json(labels)) == labels);
    }
  }
  SUBCASE("missing tower") {
    write(dir / "l.json",
          R"({"schema_version":1,"provenance":"auto","intervals":{"RV":[],"LH":[],"LV":[]}})");
    CHECK(error_of([&] { load_labels(dir / "l.json"); }).find("missing field 'RH'") != std::string::npos);
  }
  SUBCASE("bad provenance") {
    write(dir / "l.json",
          R"({"schema_version":1,"provenance":"manual","intervals":{"RV":[],"LH":[],"LV":[],"RH":[]}})");
    CHECK_THROWS_AS(load_labels(dir / "l.json"), InputError);
  }
  SUBCASE("overlap rejected on load, accepted by the structural parser") {
    const std::string text =
        R"({"schema_version":1,"provenance":"corrected","intervals":{"RV":[[1,4],[3,6]],"LH":[],"LV":[],"RH":[]}})";
    CHECK_THROWS_AS(labels_from_json(text), InputError);
    const ErrorIntervalSet parsed = parse_labels_document(text);
    CHECK(parsed.of(TowerId::RV).size() == 2);
    CHECK(parsed.provenance == Provenance::Corrected);
  }
  SUBCASE("interval outside its segment") {
    ErrorIntervalSet labels;
    labels.of(TowerId::RV) = {{8, 12}};
    save_labels(labels, dir / "l.json");
    CHECK_NOTHROW(load_labels(dir / "l.json"));
    CHECK_THROWS_AS(load_labels(dir / "l.json", simple_segmentation()), InputError);
  }
}
