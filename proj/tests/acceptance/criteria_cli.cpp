// Criterion 10: the command-line pipeline runs end to end, exits cleanly,
// finishes quickly, and produces byte-identical artifacts when repeated with
// the same seeds.

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "harness.hpp"

#ifndef LOCKSMITH_CLI_PATH
#error "LOCKSMITH_CLI_PATH must point at the command-line binary"
#endif

namespace acceptance {
namespace {

namespace fs = std::filesystem;

int run_step(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(LOCKSMITH_CLI_PATH) + " " + args + " >> " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_10() {
  constexpr double kTimeLimit = 60.0;
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = testsup::scratch_dir("acceptance_cli");
  const fs::path log = dir / "steps.log";
  const std::string orig = (dir / "orig.bench").string();

  // Two passes over lock -> dataset -> train with identical seeds; artifact
  // bytes must match across them.
  struct Step {
    std::string name;
    std::string args;
  };
  std::vector<Step> steps{
      {"gen", "gen --family motif --name pipeline --inputs 8 --outputs 3 --gates 44 --sites 4"
              " --seed 42 --out " + orig},
  };
  for (const std::string tag : {"a", "b"}) {
    const std::string locked = (dir / ("locked_" + tag)).string();
    const std::string data = (dir / ("data_" + tag)).string();
    const std::string model = (dir / ("model_" + tag + ".bin")).string();
    steps.push_back({"lock_" + tag, "lock " + orig + " --scheme xor --key-width 4 --seed 5"
                                    " --out " + locked});
    steps.push_back({"dataset_" + tag,
                     "dataset --bench " + orig + " --scheme xor --scheme mux --key-width 4"
                     " --wrong-keys 3 --variants 2 --stratified --er-method exhaustive"
                     " --seed 11 --threads 2 --out " + data});
    steps.push_back({"train_" + tag,
                     "train --dataset " + data + " --hops 2 --hidden 12 --layers 2 --epochs 8"
                     " --batch 8 --patience 8 --loss-ceiling 50 --seed 13 --threads 2"
                     " --out " + model});
  }
  const std::string locked_a = (dir / "locked_a").string();
  const std::string model_a = (dir / "model_a.bin").string();
  const std::string key_json = (dir / "key.json").string();
  steps.push_back({"attack", "attack --model " + model_a + " --locked-dir " + locked_a +
                             " --mode refined --hops 2 --out " + key_json});
  steps.push_back({"explain", "explain --model " + model_a + " --locked-dir " + locked_a +
                              " --budget 4 --steps 120 --out-dir " + (dir / "explain").string()});
  steps.push_back({"eval", "eval --original " + orig + " --locked-dir " + locked_a +
                           " --key-file " + key_json + " --er-method exhaustive"
                           " --assert 'er>=0' --assert 'hamming<=4'"});

  for (const Step& s : steps) {
    const int code = run_step(s.args, log);
    if (code != 0) {
      std::ostringstream ss;
      ss << "step " << s.name << " exited " << code << " (log: " << log.string() << ")";
      return fail(ss.str());
    }
  }

  const std::vector<std::string> artifacts{"locked.bench", "key.json"};
  for (const std::string& f : artifacts) {
    if (slurp(dir / "locked_a" / f) != slurp(dir / "locked_b" / f))
      return fail("locked-circuit artifact " + f + " differs between identical runs");
  }
  if (slurp(dir / "data_a" / "dataset.jsonl") != slurp(dir / "data_b" / "dataset.jsonl"))
    return fail("dataset.jsonl differs between identical runs");
  if (slurp(dir / "data_a" / "dataset.jsonl").empty())
    return fail("dataset.jsonl is empty");
  if (slurp(dir / "model_a.bin") != slurp(dir / "model_b.bin"))
    return fail("model checkpoint differs between identical runs");
  if (slurp(dir / "model_a.bin").empty()) return fail("model checkpoint is empty");

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= kTimeLimit) {
    std::ostringstream ss;
    ss << "pipeline took " << secs << "s, limit " << kTimeLimit << "s";
    return fail(ss.str());
  }
  std::ostringstream ss;
  ss << steps.size() << " commands, all exit 0, artifacts byte-identical across reruns, "
     << secs << "s";
  return pass(ss.str());
}

Register r10(10, "command-line pipeline round trip", criterion_10);

}  // namespace
}  // namespace acceptance
