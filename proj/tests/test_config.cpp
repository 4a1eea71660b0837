// sslvc/tests/test_config.cpp

// Copyright 2026  sslvc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <fstream>

#include "sslvc/config.hpp"

using namespace sslvc;
namespace fs = std::filesystem;

TEST_CASE("toml subset parses tables, scalars and arrays") {
  auto j = parse_toml(R"(
# comment
seed = 7
name = "a \"b\""   # trailing comment
lit = 'C:\path'
[model.generator]
hidden_dim = 1_024
dropout = 0.1
[training]
lr_g = 2e-4
flag = true
rates = [0.8, 1.0,
         1.2,]   # multi-line
point = { x = 1, y = -2 }
)");
  CHECK(j["seed"] == 7);
  CHECK(j["name"] == "a \"b\"");
  CHECK(j["lit"] == "C:\\path");
  CHECK(j["model"]["generator"]["hidden_dim"] == 1024);
  CHECK(j["model"]["generator"]["dropout"].get<double>() == doctest::Approx(0.1));
  CHECK(j["training"]["lr_g"].get<double>() == doctest::Approx(2e-4));
  CHECK(j["training"]["flag"] == true);
  CHECK(j["training"]["rates"].size() == 3);
  CHECK(j["training"]["point"]["y"] == -2);
}

TEST_CASE("toml errors carry line numbers") {
  try {
    parse_toml("a = 1\nb = \n", "x.toml");
    FAIL("expected ConfigError");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("x.toml:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_toml("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[t]\n[t]\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("s = \"open\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[[arr]]\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("x = 1 2\n"), ConfigError);
}

TEST_CASE("overrides") {
  nlohmann::json j = nlohmann::json::object();
  apply_override(j, "training.steps=50");
  apply_override(j, "extractor.kind=precomputed");
  apply_override(j, "data.rates=[0.9, 1.1]");
  CHECK(j["training"]["steps"] == 50);
  CHECK(j["extractor"]["kind"] == "precomputed");
  CHECK(j["data"]["rates"].size() == 2);
  CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
}

namespace {

nlohmann::json minimal() {
  return parse_toml(R"(
seed = 3
[paths]
target_dir = "corpus/target"
external_dir = "corpus/external"
[extractor]
dim = 32
[model.generator]
input_dim = 32
hidden_dim = 16
ffn_dim = 32
[training]
steps = 10
)");
}

}  // namespace

TEST_CASE("project config: defaults, path resolution and seed propagation") {
  auto c = project_config_from_json(minimal(), "/base");
  CHECK(c.paths.target_dir == fs::path("/base/corpus/target"));
  CHECK(c.paths.workdir == fs::path("/base/work"));
  CHECK(c.training.seed == 3);
  CHECK(c.training.steps == 10);
  CHECK(c.model.embedding_discriminator.input_dim == 16);
  CHECK(c.extractor.kind == ExtractorKind::kMock);
  // Round trip through JSON keeps every value.
  auto again = project_config_from_json(to_json(c));
  CHECK(to_json(again) == to_json(c));
}

TEST_CASE("project config rejects unknown keys and bad values") {
  auto j = minimal();
  j["training"]["stepz"] = 1;
  CHECK_THROWS_WITH_AS(project_config_from_json(j), doctest::Contains("training.stepz"), ConfigError);
  j = minimal();
  j["model"]["generator"]["heads"] = 2;
  CHECK_THROWS_AS(project_config_from_json(j), ConfigError);
  j = minimal();
  j["training"]["seed"] = 1;  // only the top-level seed is accepted
  CHECK_THROWS_AS(project_config_from_json(j), ConfigError);
  j = minimal();
  j["extractor"]["dim"] = 64;  // no longer matches the generator input
  CHECK_THROWS_AS(project_config_from_json(j), ConfigError);
  j = minimal();
  j["training"]["steps"] = "many";
  CHECK_THROWS_AS(project_config_from_json(j), ConfigError);
  j = minimal();
  j["data"]["rates"] = {0.5};
  CHECK_THROWS_AS(project_config_from_json(j), ConfigError);
  j = minimal();
  j["paths"].erase("external_dir");
  CHECK_THROWS_AS(project_config_from_json(j), ConfigError);
  j = minimal();
  j["eval"]["vocoder"] = "external_command";
  CHECK_THROWS_AS(project_config_from_json(j), ConfigError);
}

TEST_CASE("load_project_config reads a file and applies overrides") {
  auto dir = fs::temp_directory_path() / "sslvc_test_config";
  fs::create_directories(dir);
  std::ofstream(dir / "c.toml") << minimal().dump() << "\n";  // not TOML
  CHECK_THROWS_AS(load_project_config(dir / "c.toml"), ConfigError);
  std::ofstream(dir / "c.toml") << "seed = 1\n[paths]\ntarget_dir = \"t\"\nexternal_dir = \"e\"\n";
  auto c = load_project_config(dir / "c.toml", {"training.steps=5"});
  CHECK(c.training.steps == 5);
  CHECK(c.paths.external_dir == dir / "e");
  CHECK_THROWS_AS(load_project_config(dir / "missing.toml"), ConfigError);
}
