// Copyright 2026 The maskfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "json.hpp"
#include "maskfuse/io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using maskfuse::read_file_text;
using maskfuse::write_file_text;

namespace
{

const fs::path kGolden = MASKFUSE_GOLDEN_DIR;

int cli(const std::string & args)
{
  const std::string cmd = std::string(MASKFUSE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path & p)
{
  return "'" + p.string() + "'";
}

}  // namespace

TEST(Cli, GenRunEvalValidate)
{
  oracle::TempDir dir("cli");
  ASSERT_EQ(cli("gen --seed 42 --width 64 --height 64 --regions 8 --distractors 2 --classes 6 --dim 16 --out " +
                q(dir / "fx")), 0);
  EXPECT_EQ(oracle::slurp(dir / "fx" / "manifest.json"),
    oracle::slurp(kGolden / "synth64" / "manifest.json"));
  ASSERT_EQ(cli("validate --manifest " + q(dir / "fx" / "manifest.json")), 0);
  ASSERT_EQ(cli("run --mode full --manifest " + q(dir / "fx" / "manifest.json") + " --out " + q(dir / "out")), 0);
  EXPECT_EQ(read_file_text(dir / "out" / "labels.json"), read_file_text(kGolden / "synth64_labels.json"));
  ASSERT_EQ(cli("eval --manifest " + q(dir / "fx" / "manifest.json") + " --pred-dir " + q(dir / "out") +
                " --out " + q(dir / "ev")), 0);
  const auto ev = nlohmann::json::parse(read_file_text(dir / "ev" / "eval.json"));
  EXPECT_EQ(ev["miou"].get<double>(), 1.0);
  ASSERT_EQ(cli("eval --pred " + q(dir / "out" / "img000.sfsl") + " --gt " +
                q(dir / "fx" / "img000_gt.sfsl") + " --taxonomy " + q(dir / "fx" / "synth.txt")), 0);
}

TEST(Cli, FlagsOverrideConfigFile)
{
  oracle::TempDir dir("cli_cfg");
  write_file_text(dir / "cfg.json", R"({"mode": "closed", "mask_budget": 3, "top_k": 2})");
  const auto manifest = q(kGolden / "synth64" / "manifest.json");
  ASSERT_EQ(cli("run --manifest " + manifest + " --config " + q(dir / "cfg.json") + " --budget 5 --out " +
                q(dir / "o")), 0);
  const auto cfg = nlohmann::json::parse(read_file_text(dir / "o" / "config.json"));
  EXPECT_EQ(cfg["mode"], "closed");
  EXPECT_EQ(cfg["mask_budget"], 5);
  EXPECT_EQ(cfg["top_k"], 2);
  EXPECT_EQ(cfg.count("workers"), 0u);
}

TEST(Cli, ExitCodes)
{
  oracle::TempDir dir("cli_err");
  EXPECT_EQ(cli("--help"), 0);
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("run --manifest"), 1);
  EXPECT_EQ(cli("run --manifest " + q(kGolden / "synth64" / "manifest.json") + " --mode both --out x"), 1);
  EXPECT_EQ(cli("validate --manifest " + q(dir / "absent.json")), 1);
  write_file_text(dir / "bad.json", "{\"schema_version\": 1}");
  EXPECT_EQ(cli("validate --manifest " + q(dir / "bad.json")), 1);
  EXPECT_EQ(cli("bench --manifest " + q(kGolden / "synth64" / "manifest.json") + " --iterations 2"), 1);
  EXPECT_EQ(cli("run --strict-embeddings --manifest " + q(kGolden / "street" / "manifest.json") + " --out " +
                q(dir / "o")), 1);
}

TEST(Cli, BenchWritesReport)
{
  oracle::TempDir dir("cli_bench");
  ASSERT_EQ(cli("bench --mode closed --iterations 3 --manifest " + q(kGolden / "synth64" / "manifest.json") +
                " --out " + q(dir.path())), 0);
  const auto j = nlohmann::json::parse(read_file_text(dir / "bench.json"));
  EXPECT_EQ(j["measured_runs"], 2);
  EXPECT_EQ(j["mode"], "closed");
}
