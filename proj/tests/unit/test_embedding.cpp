#include <gtest/gtest.h>
#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>

#include "fixtures.hpp"
#include "hlc/embedding.hpp"
#include "hlc/error.hpp"
#include "hlc/json.hpp"

using namespace hlc;
using hlc::testing::MockTransport;

namespace {

// Reference for ASCII input: padded lowercase text, byte trigrams,
// FNV-1a 64 into buckets, L2 normalized.
std::vector<double> reference_embed(std::string text, std::size_t dim) {
  for (auto& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const std::string padded = " " + text + " ";
  std::vector<double> v(dim, 0.0);
  auto fnv = [](const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  };
  if (padded.size() < 3) {
    v[fnv(padded) % dim] += 1;
  } else {
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) v[fnv(padded.substr(i, 3)) % dim] += 1;
  }
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

// Exact trigram multiset cosine without hashing.
double trigram_cosine(const std::string& a, const std::string& b) {
  auto grams = [](const std::string& t) {
    std::map<std::string, double> m;
    const std::string p = " " + t + " ";
    for (std::size_t i = 0; i + 3 <= p.size(); ++i) m[p.substr(i, 3)] += 1;
    return m;
  };
  const auto ga = grams(a), gb = grams(b);
  double dot = 0, na = 0, nb = 0;
  for (const auto& [g, c] : ga) {
    na += c * c;
    if (auto it = gb.find(g); it != gb.end()) dot += c * it->second;
  }
  for (const auto& [g, c] : gb) nb += c * c;
  return dot / std::sqrt(na * nb);
}

EmbeddingProviderConfig remote_config(std::size_t dim) {
  EmbeddingProviderConfig c;
  c.kind = ProviderKind::remote;
  c.endpoint_url = "http://embed.invalid/v1/embeddings";
  c.model_name = "test-embed";
  c.dim = dim;
  c.retry = hlc::testing::fast_retry();
  return c;
}

}  // namespace

TEST(FallbackEmbed, MatchesReferenceHashing) {
  for (const char* s : {"certain crash levels", "a", "", "The TCU is connected", "x y"}) {
    const auto v = deterministic_fallback_embed(s, 64);
    const auto ref = reference_embed(s, 64);
    ASSERT_EQ(v.dim(), 64u);
    for (std::size_t i = 0; i < 64; ++i) EXPECT_DOUBLE_EQ(v.values()[i], ref[i]) << s;
  }
}

TEST(FallbackEmbed, PureAndUnitNorm) {
  const auto a = deterministic_fallback_embed("certain crash levels");
  const auto b = deterministic_fallback_embed("certain crash levels");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.dim(), 256u);
  EXPECT_NEAR(a.norm(), 1.0, 1e-9);
  EXPECT_NE(deterministic_fallback_embed("a"), deterministic_fallback_embed("b"));
  EXPECT_EQ(deterministic_fallback_embed("Certain  CRASH levels"), a);
}

TEST(FallbackEmbed, SimilarTextsScoreHigher) {
  const auto base = deterministic_fallback_embed("certain crash levels");
  const double near = cosine_similarity(base, deterministic_fallback_embed("certain crash level"));
  const double far = cosine_similarity(base, deterministic_fallback_embed("unrelated sentence"));
  EXPECT_GT(near, far);
  EXPECT_GT(trigram_cosine("certain crash levels", "certain crash level"),
            trigram_cosine("certain crash levels", "unrelated sentence"));
}

TEST(FallbackEmbed, RejectsTinyDim) {
  EXPECT_THROW(deterministic_fallback_embed("x", 4), Error);
  EXPECT_THROW(LocalHashEmbedder(7), Error);
}

TEST(Cosine, HandValues) {
  const EmbeddingVector a({1.0, 0.0});
  const EmbeddingVector b({0.0, 1.0});
  const EmbeddingVector c({1.0, 1.0});
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
  EXPECT_NEAR(cosine_similarity(c, a), 0.70710678, 1e-8);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, EmbeddingVector({-2.0, 0.0})), -1.0);
}

TEST(Cosine, Errors) {
  try {
    (void)cosine_similarity(EmbeddingVector({1.0, 0.0}), EmbeddingVector({1.0, 0.0, 0.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  try {
    (void)cosine_similarity(EmbeddingVector({0.0, 0.0}), EmbeddingVector({1.0, 0.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
  EXPECT_THROW(EmbeddingVector(std::vector<double>{}), Error);
  EXPECT_THROW(EmbeddingVector({1.0, NAN}), Error);
}

TEST(CosineProperty, SymmetryScalingSelf) {
  eval::Rng rng(9);
  auto draw = [&] {
    std::vector<double> v(16);
    for (auto& x : v) x = static_cast<double>(rng.uniform_index(2001)) / 1000.0 - 1.0;
    v[0] += 2.5;
    return v;
  };
  for (int i = 0; i < 300; ++i) {
    const auto va = draw();
    const EmbeddingVector a(va), b(draw());
    EXPECT_EQ(cosine_similarity(a, b), cosine_similarity(b, a));
    EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-9);
    auto scaled = va;
    const double c = 0.01 + static_cast<double>(rng.uniform_index(1000));
    for (auto& x : scaled) x *= c;
    EXPECT_NEAR(cosine_similarity(EmbeddingVector(scaled), b), cosine_similarity(a, b), 1e-9);
    const double s = cosine_similarity(a, b);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(EmbedText, LocalConfigAndBlankText) {
  EmbeddingProviderConfig cfg;
  cfg.dim = 32;
  EXPECT_EQ(embed_text("certain crash levels", cfg), deterministic_fallback_embed("certain crash levels", 32));
  try {
    (void)embed_text("   ", cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(ProviderConfig, Validation) {
  EmbeddingProviderConfig c;
  c.dim = 0;
  EXPECT_THROW(c.validate(), Error);
  c = remote_config(8);
  c.endpoint_url.clear();
  EXPECT_THROW(c.validate(), Error);
  EXPECT_NO_THROW(remote_config(8).validate());
}

TEST(RemoteEmbedder, ParsesResponseShapes) {
  auto t = std::make_shared<MockTransport>(std::deque<HttpResponse>{
      {200, "[1,2,3,4,5,6,7,8]"},
      {200, R"({"data":[{"embedding":[0,0,0,0,0,0,0,1]}]})"},
      {200, R"({"embedding":[1,1,1,1,1,1,1,1]})"}});
  const auto p = make_embedding_provider(remote_config(8), t);
  EXPECT_EQ(p->embed("x").values()[7], 8.0);
  EXPECT_EQ(p->embed("x").values()[7], 1.0);
  EXPECT_EQ(p->embed("x").values()[0], 1.0);
  ASSERT_EQ(t->requests.size(), 3u);
  const auto body = Json::parse(t->requests[0].body);
  EXPECT_EQ(body["input"], "x");
  EXPECT_EQ(body["model"], "test-embed");
}

TEST(RemoteEmbedder, WrongLengthIsDimensionMismatch) {
  auto t = std::make_shared<MockTransport>(std::deque<HttpResponse>{{200, "[1,2,3,4,5]"}});
  const auto p = make_embedding_provider(remote_config(8), t);
  try {
    (void)p->embed("x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(RemoteEmbedder, RetriesTransientFailures) {
  auto t = std::make_shared<MockTransport>(
      std::deque<HttpResponse>{{-1, ""}, {503, ""}, {200, "[1,0,0,0,0,0,0,0]"}});
  const auto p = make_embedding_provider(remote_config(8), t);
  EXPECT_EQ(p->embed("x").values()[0], 1.0);
  EXPECT_EQ(t->requests.size(), 3u);
}

TEST(RemoteEmbedder, GivesUpAfterThreeAttemptsOrOnClientError) {
  auto t = std::make_shared<MockTransport>(std::deque<HttpResponse>{{429, ""}, {500, ""}, {502, ""}, {200, "[]"}});
  const auto p = make_embedding_provider(remote_config(8), t);
  try {
    (void)p->embed("x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProviderError);
  }
  EXPECT_EQ(t->requests.size(), 3u);

  auto t2 = std::make_shared<MockTransport>(std::deque<HttpResponse>{{401, ""}, {200, "[1,0,0,0,0,0,0,0]"}});
  EXPECT_THROW((void)make_embedding_provider(remote_config(8), t2)->embed("x"), Error);
  EXPECT_EQ(t2->requests.size(), 1u);
}

TEST(RemoteEmbedder, SendsApiKeyFromEnvironment) {
  ::setenv("HLC_TEST_EMBED_KEY", "sekret", 1);
  auto cfg = remote_config(8);
  cfg.api_key_env = "HLC_TEST_EMBED_KEY";
  auto t = std::make_shared<MockTransport>(std::deque<HttpResponse>{{200, "[1,0,0,0,0,0,0,0]"}});
  (void)make_embedding_provider(cfg, t)->embed("x");
  EXPECT_EQ(t->requests[0].headers.at("Authorization"), "Bearer sekret");
  ::unsetenv("HLC_TEST_EMBED_KEY");
}

TEST(RemoteEmbedder, OverRealHttpOnLoopback) {
  httplib::Server server;
  std::string seen_body;
  server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    res.set_content(R"({"data":[{"embedding":[0.5,0,0,0,0,0,0,0.5]}]})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto cfg = remote_config(8);
  cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/embeddings";
  const auto v = make_embedding_provider(cfg)->embed("certain crash levels");
  server.stop();
  th.join();
  EXPECT_EQ(v.values()[0], 0.5);
  EXPECT_EQ(Json::parse(seen_body)["input"], "certain crash levels");
}

TEST(HttpTransport, ConnectionRefusedIsProviderError) {
  const auto t = make_http_transport(std::chrono::milliseconds(500));
  try {
    (void)t->post({"http://127.0.0.1:1/none", "{}", {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProviderError);
  }
}
