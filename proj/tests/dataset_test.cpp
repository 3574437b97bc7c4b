#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "playstyle/dataset.hpp"
#include "playstyle/errors.hpp"

namespace playstyle {
namespace {

namespace fs = std::filesystem;

PlayDataset random_dataset(std::mt19937_64& rng, std::size_t n, bool continuous) {
  std::uniform_int_distribution<int> dim(1, 4), byte(0, 255);
  Shape shape{static_cast<std::uint32_t>(dim(rng)), static_cast<std::uint32_t>(dim(rng))};
  const auto space = continuous ? ActionSpace::continuous(dim(rng)) : ActionSpace::discrete(dim(rng) + 1);
  PlayDataset ds("r", space, shape);
  std::normal_distribution<float> gauss;
  std::vector<std::uint8_t> obs(shape_volume(shape));
  std::vector<float> act(space.size);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& b : obs) b = static_cast<std::uint8_t>(byte(rng));
    if (continuous) {
      for (auto& a : act) a = gauss(rng);
      ds.add(obs, act);
    } else {
      ds.add(obs, std::uniform_int_distribution<std::uint32_t>(0, space.size - 1)(rng));
    }
    // Exact duplicates now and then.
    if (i % 7 == 3) ds.append_from(ds, ds.size() - 1);
  }
  return ds;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("playstyle_dataset_test_" + name);
}

TEST(Dataset, RejectsNonConformingSamples) {
  PlayDataset ds("d", ActionSpace::discrete(3), {2, 2});
  std::vector<std::uint8_t> obs(4, 1);
  EXPECT_THROW(ds.add(obs, 3u), ShapeError);
  EXPECT_THROW(ds.add(std::vector<std::uint8_t>(3), 0u), ShapeError);
  EXPECT_THROW(ds.add(obs, std::vector<float>{1.0f}), ShapeError);
  ds.add(obs, 2u);
  EXPECT_EQ(ds.size(), 1u);

  PlayDataset c("c", ActionSpace::continuous(2), {2, 2});
  EXPECT_THROW(c.add(obs, std::vector<float>{1.0f}), ShapeError);
  EXPECT_THROW(c.add(obs, 0u), ShapeError);
}

TEST(Dataset, RoundTripProperty) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ds = random_dataset(rng, trial % 13, trial % 2 == 0);
    const auto bytes = encode_dataset(ds);
    EXPECT_EQ(decode_dataset(bytes), ds);
    EXPECT_EQ(encode_dataset(decode_dataset(bytes)), bytes);
  }
}

TEST(Dataset, SaveLoadFile1024) {
  std::mt19937_64 rng(2);
  auto ds = random_dataset(rng, 1024, true);
  const auto path = temp_file("rt.psty");
  save_dataset(ds, path);
  const auto back = load_dataset(path);
  EXPECT_EQ(back, ds);
  EXPECT_EQ(back.id(), "playstyle_dataset_test_rt");
  fs::remove(path);
}

TEST(Dataset, EmptyDatasetRoundTrip) {
  PlayDataset ds("e", ActionSpace::discrete(4), {1, 3});
  const auto bytes = encode_dataset(ds);
  // magic 4 + version 2 + rank 1 + dims 8 + tag 1 + size 4 + count 8
  ASSERT_EQ(bytes.size(), 28u);
  std::uint64_t count = 99;
  std::memcpy(&count, bytes.data() + 20, 8);
  EXPECT_EQ(count, 0u);
  EXPECT_TRUE(decode_dataset(bytes).empty());
}

TEST(Dataset, HeaderBytesByHand) {
  PlayDataset ds("c", ActionSpace::continuous(2), {1, 2});
  ds.add(std::vector<std::uint8_t>{7, 9}, std::vector<float>{1.5f, -2.0f});
  const auto bytes = encode_dataset(ds);
  const std::vector<std::uint8_t> header{'P', 'S', 'T', 'Y', 1, 0, 2, 1, 0, 0, 0, 2, 0, 0, 0, 1, 2, 0, 0, 0,
                                         1, 0, 0, 0, 0, 0, 0, 0};
  ASSERT_EQ(bytes.size(), header.size() + 2 + 8);
  EXPECT_TRUE(std::equal(header.begin(), header.end(), bytes.begin()));
  EXPECT_EQ(bytes[28], 7);
  EXPECT_EQ(bytes[29], 9);
  // Two f32 values per record: 1.5 = 0x3FC00000, -2 = 0xC0000000.
  const std::vector<std::uint8_t> actions{0, 0, 0xC0, 0x3F, 0, 0, 0, 0xC0};
  EXPECT_TRUE(std::equal(actions.begin(), actions.end(), bytes.begin() + 30));
}

TEST(Dataset, SavesAreDeterministic) {
  std::mt19937_64 rng(3);
  const auto ds = random_dataset(rng, 50, false);
  const auto a = temp_file("a.psty"), b = temp_file("b.psty");
  save_dataset(ds, a);
  save_dataset(ds, b);
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_EQ(sa, sb);
  fs::remove(a);
  fs::remove(b);
}

TEST(Dataset, TruncatedFileReportsRecord) {
  PlayDataset ds("t", ActionSpace::discrete(2), {2});
  for (std::uint8_t i = 0; i < 10; ++i) ds.add(std::vector<std::uint8_t>{i, i}, i % 2u);
  auto bytes = encode_dataset(ds);
  bytes.resize(bytes.size() - 6);  // exactly one 6-byte record short
  try {
    decode_dataset(bytes);
    FAIL() << "expected CorruptionError";
  } catch (const CorruptionError& e) {
    EXPECT_EQ(e.record(), 9u);
  }
  bytes.resize(bytes.size() - 3);  // and a partial record
  try {
    decode_dataset(bytes);
    FAIL() << "expected CorruptionError";
  } catch (const CorruptionError& e) {
    EXPECT_EQ(e.record(), 8u);
  }
}

TEST(Dataset, BadHeaders) {
  PlayDataset ds("h", ActionSpace::discrete(2), {1});
  auto bytes = encode_dataset(ds);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_dataset(bad), FormatError);
  bad = bytes;
  bad[4] = 2;
  EXPECT_THROW(decode_dataset(bad), FormatError);
  bad = bytes;
  bad.push_back(0);
  EXPECT_THROW(decode_dataset(bad), FormatError);
  EXPECT_THROW(load_dataset(temp_file("does_not_exist.psty")), IoError);
}

TEST(Dataset, OutOfRangeIndexInFileIsCorruption) {
  PlayDataset ds("h", ActionSpace::discrete(2), {1});
  ds.add(std::vector<std::uint8_t>{0}, 1u);
  auto bytes = encode_dataset(ds);
  bytes[bytes.size() - 4] = 5;
  EXPECT_THROW(decode_dataset(bytes), CorruptionError);
}

TEST(Dataset, MultiplicitySurvives) {
  PlayDataset ds("m", ActionSpace::discrete(3), {1});
  for (int i = 0; i < 5; ++i) ds.add(std::vector<std::uint8_t>{42}, 1u);
  ds.add(std::vector<std::uint8_t>{43}, 2u);
  const auto back = decode_dataset(encode_dataset(ds));
  ASSERT_EQ(back.size(), 6u);
  EXPECT_EQ(std::count(back.action_indices().begin(), back.action_indices().end(), 1u), 5);
}

std::map<std::vector<std::uint8_t>, int> histogram(const PlayDataset& ds) {
  std::map<std::vector<std::uint8_t>, int> h;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto o = ds.observation(i);
    std::vector<std::uint8_t> key(o.begin(), o.end());
    key.push_back(static_cast<std::uint8_t>(ds.discrete_action(i)));
    ++h[key];
  }
  return h;
}

TEST(Dataset, SubsetProperties) {
  PlayDataset pool("p", ActionSpace::discrete(4), {2});
  for (std::uint32_t i = 0; i < 5000; ++i) {
    pool.add(std::vector<std::uint8_t>{static_cast<std::uint8_t>(i & 255), static_cast<std::uint8_t>(i >> 8)}, i % 4);
  }
  const auto a = sample_subset(pool, 1024, 17);
  EXPECT_EQ(a.size(), 1024u);
  EXPECT_EQ(sample_subset(pool, 1024, 17), a);
  EXPECT_FALSE(sample_subset(pool, 1024, 18) == a);
  // Without replacement from distinct samples: no repeats, all from the pool.
  const auto pool_h = histogram(pool);
  const auto h = histogram(a);
  EXPECT_EQ(h.size(), 1024u);
  for (const auto& [k, c] : h) {
    EXPECT_EQ(c, 1);
    EXPECT_TRUE(pool_h.count(k));
  }
  const auto full = sample_subset(pool, pool.size(), 3);
  EXPECT_EQ(histogram(full), pool_h);
  EXPECT_THROW(sample_subset(pool, 5001, 1), SizeError);
}

}  // namespace
}  // namespace playstyle
