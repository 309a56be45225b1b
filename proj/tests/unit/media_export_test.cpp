#include <random>

#include <gtest/gtest.h>

#include "demoforge/store/export.hpp"
#include "demoforge/store/media_store.hpp"
#include "demoforge/store/validate.hpp"
#include "test_support.hpp"

namespace demoforge::store {
namespace {

namespace fs = std::filesystem;

std::string random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::string s(n, '\0');
  for (auto& c : s) c = static_cast<char>(rng());
  return s;
}

std::string record_episode(EpisodeStore& st, const std::string& scene_name, const std::string& session,
                           const std::string& label, int ticks, bool finalize = true) {
  const CatalogScene& cs = *testing::catalog().scene(scene_name);
  sim::WorldState w = sim::load_scene(cs.scene);
  auto writer = st.open_episode(SessionMeta{session, &cs}, label, w.tick + 1, w);
  for (int k = 0; k < ticks; ++k) {
    const std::int64_t t = w.tick + 1;
    const bool act = k % 10 == 0;
    if (act) w = sim::apply_teleop(std::move(w), sim::EeDelta{0.01, 0.0, 0, 0, 0, 0});
    auto [next, f] = sim::step(std::move(w), sim::kTickDt);
    w = std::move(next);
    writer->append_frame(f);
    if (act) writer->append_action({t, sim::EeDelta{0.01, 0.0, 0, 0, 0, 0}, k + 1, "c1"});
  }
  const std::string id = writer->episode_id();
  if (finalize) {
    writer->finalize();
  } else {
    writer->flush();
    writer.release();  // left open on purpose
  }
  return id;
}

struct MediaFixture : ::testing::Test {
  testing::TempDir dir{"media"};
  EpisodeStore st{dir.path()};
  std::string episode = record_episode(st, "tabletop", "s1", "pick", 20);

  MediaUpload upload() const {
    MediaUpload u;
    u.target = episode;
    u.target_dir = st.episode_dir(episode);
    u.declared_mime = "video/mp4";
    u.metadata = {"tabletop", "planar3", "pick", "alice", 1.5};
    return u;
  }
};

TEST_F(MediaFixture, KibBlobDigestMatchesIndependentHash) {
  MediaStore media(st);
  const std::string bytes = random_bytes(1024, 1);
  bool created = false;
  const MediaRecord r = media.put(upload(), bytes, &created);
  EXPECT_TRUE(created);
  EXPECT_EQ(r.content_digest, testing::sodium_sha256_hex(bytes));
  EXPECT_EQ(r.byte_length, 1024);
  EXPECT_EQ(testing::read_file(media.blobs_dir() / r.content_digest), bytes);
  EXPECT_EQ(testing::read_file(st.episode_dir(episode) / layout::kMediaDir / r.content_digest), bytes);
  EXPECT_EQ(st.manifest(episode).media, std::vector<std::string>{r.media_id});
  EXPECT_TRUE(validate_episode(st.episode_dir(episode)).ok);
}

TEST_F(MediaFixture, SameBytesSameId) {
  MediaStore media(st);
  const std::string bytes = random_bytes(4096, 2);
  const MediaRecord a = media.put(upload(), bytes);
  bool created = true;
  const MediaRecord b = media.put(upload(), bytes, &created);
  const MediaRecord c = media.put(upload(), bytes);
  EXPECT_FALSE(created);
  EXPECT_EQ(a.media_id, b.media_id);
  EXPECT_EQ(a, c);
  EXPECT_EQ(st.media(st.episode_dir(episode)).size(), 1u);
  std::size_t blobs = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(media.blobs_dir())) ++blobs;
  EXPECT_EQ(blobs, 1u);
}

TEST_F(MediaFixture, OverCapPersistsNothing) {
  MediaStore media(st, 1000);
  try {
    media.put(upload(), random_bytes(1001, 3));
    FAIL();
  } catch (const StoreError& e) {
    EXPECT_EQ(e.kind(), StoreError::Kind::too_large);
  }
  EXPECT_FALSE(fs::exists(media.blobs_dir()));
  EXPECT_TRUE(st.media(st.episode_dir(episode)).empty());
  EXPECT_NO_THROW(media.put(upload(), random_bytes(1000, 3)));
}

TEST_F(MediaFixture, DeclaredDigest) {
  MediaStore media(st);
  const std::string bytes = random_bytes(100, 4);
  MediaUpload u = upload();
  u.declared_digest = std::string(64, 'a');
  try {
    media.put(u, bytes);
    FAIL();
  } catch (const StoreError& e) {
    EXPECT_EQ(e.kind(), StoreError::Kind::digest_mismatch);
  }
  EXPECT_FALSE(fs::exists(media.blobs_dir()));
  std::string upper = testing::sodium_sha256_hex(bytes);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  u.declared_digest = upper;
  EXPECT_NO_THROW(media.put(u, bytes));
}

TEST_F(MediaFixture, EmptyBodyRejected) {
  MediaStore media(st);
  EXPECT_THROW(media.put(upload(), ""), StoreError);
}

TEST_F(MediaFixture, TamperedBlobFailsValidation) {
  MediaStore media(st);
  const MediaRecord r = media.put(upload(), random_bytes(64, 5));
  const fs::path link = st.episode_dir(episode) / layout::kMediaDir / r.content_digest;
  fs::remove(link);
  testing::write_file(link, "tampered");
  const ValidationReport rep = validate_episode(st.episode_dir(episode));
  EXPECT_FALSE(rep.ok);
  ASSERT_FALSE(rep.errors.empty());
  EXPECT_EQ(rep.errors[0].locator, "media.log:1");
}

TEST(Export, DeterministicAndRowCountsMatchFrames) {
  testing::TempDir dir("export");
  EpisodeStore st(dir / "data");
  record_episode(st, "tabletop", "s1", "pick", 40);
  record_episode(st, "planar2_open", "s2", "arc", 25);
  record_episode(st, "tabletop", "s3", "push", 33);
  const std::string open_id = record_episode(st, "tabletop", "s4", "pick", 60, false);

  const ExportResult a = export_dataset(st, {}, dir / "a");
  const ExportResult b = export_dataset(st, {}, dir / "b");
  EXPECT_EQ(a.episode_ids, b.episode_ids);
  ASSERT_EQ(a.episode_ids.size(), 3u);
  for (const char* f : {"index.log"}) EXPECT_EQ(testing::read_file(dir / "a" / f), testing::read_file(dir / "b" / f));
  for (const auto& id : a.episode_ids) {
    const std::string name = id + ".aligned.log";
    EXPECT_EQ(testing::read_file(dir / "a" / name), testing::read_file(dir / "b" / name));
    const auto rows = testing::read_lines(dir / "a" / name);
    EXPECT_EQ(static_cast<std::int64_t>(rows.size()), st.manifest(id).frame_count);
    std::int64_t with_action = 0;
    for (const auto& row : rows) {
      const auto j = wire::parse_text(row);
      EXPECT_FALSE(j.contains("t"));
      if (!j["action"].is_null()) {
        ++with_action;
        EXPECT_EQ(j["action"][0]["tick"], j["tick"]);
      }
    }
    EXPECT_EQ(with_action, st.manifest(id).action_count);
  }
  EXPECT_EQ(testing::read_lines(dir / "a" / "index.log").size(), 3u);

  ExportFilter all;
  all.finalized_only = false;
  const ExportResult c = export_dataset(st, all, dir / "c");
  EXPECT_EQ(c.episode_ids.size(), 4u);
  EXPECT_TRUE(std::find(c.episode_ids.begin(), c.episode_ids.end(), open_id) != c.episode_ids.end());
}

TEST(Export, Filters) {
  testing::TempDir dir("export");
  EpisodeStore st(dir / "data");
  record_episode(st, "tabletop", "s1", "pick", 5);
  record_episode(st, "planar2_open", "s2", "arc", 5);
  ExportFilter f;
  f.scene = "planar2_open";
  EXPECT_EQ(export_dataset(st, f, dir / "x").episode_ids.size(), 1u);
  f = {};
  f.robot = "planar3";
  EXPECT_EQ(export_dataset(st, f, dir / "y").episode_ids.size(), 1u);
  f = {};
  f.label = "nothing";
  const ExportResult none = export_dataset(st, f, dir / "z");
  EXPECT_TRUE(none.episode_ids.empty());
  EXPECT_FALSE(none.warnings.empty());
  EXPECT_EQ(testing::read_file(dir / "z" / "index.log"), "");
}

}  // namespace
}  // namespace demoforge::store
