#include "stck/checkpoint.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "testutil.hpp"

using namespace stck;

namespace {

std::string temp_path(const char* name) {
  return std::string(::testing::TempDir()) + name;
}

}  // namespace

TEST(Checkpoint, RoundTrip) {
  std::mt19937_64 rng(11);
  NamedTensors tensors;
  tensors.emplace_back("alpha.weight", testutil::random_tensor({3, 2, 3, 3}, rng));
  tensors.emplace_back("alpha.bias", testutil::random_tensor({3}, rng));
  tensors.emplace_back("beta", testutil::random_tensor({7, 5}, rng));

  const std::string path = temp_path("roundtrip.stck");
  save_checkpoint(path, tensors);
  const NamedTensors loaded = load_checkpoint(path);

  ASSERT_EQ(loaded.size(), tensors.size());
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    EXPECT_EQ(loaded[i].first, tensors[i].first);
    EXPECT_EQ(loaded[i].second.shape, tensors[i].second.shape);
    EXPECT_EQ(loaded[i].second.data, tensors[i].second.data);  // bit-exact
  }
}

TEST(Checkpoint, RejectsBadMagic) {
  const std::string path = temp_path("badmagic.stck");
  std::ofstream(path, std::ios::binary) << "NOPE garbage";
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
}

TEST(Checkpoint, RejectsTruncation) {
  std::mt19937_64 rng(12);
  NamedTensors tensors;
  tensors.emplace_back("w", testutil::random_tensor({4, 4}, rng));
  const std::string path = temp_path("trunc.stck");
  save_checkpoint(path, tensors);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes.substr(0, bytes.size() - 9);
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
}

TEST(Checkpoint, RejectsTrailingBytes) {
  NamedTensors tensors;
  tensors.emplace_back("w", Tensor({2}, {1.0, 2.0}));
  const std::string path = temp_path("trailing.stck");
  save_checkpoint(path, tensors);
  std::ofstream(path, std::ios::binary | std::ios::app) << "extra";
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
}
