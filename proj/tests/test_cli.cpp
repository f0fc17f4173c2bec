#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

// Process-level checks of the installed tool (path injected by the build).

namespace {

namespace fs = std::filesystem;

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "alquery_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ALQUERY_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

fs::path make_pool() {
  static fs::path pool;
  if (pool.empty()) {
    pool = work_dir() / "pool.csv";
    REQUIRE(run_cli("synth --classes 4 --per-class 100 --dims 3 --seed 7 --out " + pool.string()) == 0);
  }
  return pool;
}

fs::path make_init_file(int count) {
  const fs::path path = work_dir() / ("init" + std::to_string(count) + ".txt");
  std::ofstream out(path);
  for (int i = 0; i < count; ++i) out << i * 11 << "\n";
  return path;
}

}  // namespace

TEST_CASE("synth writes the requested pool with a manifest and is reproducible") {
  const fs::path out_a = work_dir() / "synth_a.csv";
  const fs::path out_b = work_dir() / "synth_b.csv";
  REQUIRE(run_cli("synth --classes 10 --per-class 500 --dims 5 --seed 42 --out " + out_a.string()) == 0);
  REQUIRE(run_cli("synth --classes 10 --per-class 500 --dims 5 --seed 42 --out " + out_b.string()) == 0);
  CHECK(line_count(out_a) == 5001);  // header + one row per sample
  CHECK(slurp(out_a) == slurp(out_b));

  const fs::path manifest = out_a.string() + ".manifest.json";
  REQUIRE(fs::exists(manifest));
  const nlohmann::json j = nlohmann::json::parse(slurp(manifest));
  CHECK(j["command"] == "synth");
  CHECK(j["seed"] == 42);
  CHECK(j["config"]["classes"] == "10");
}

TEST_CASE("synth rejects zero classes with a usage exit code") {
  CHECK(run_cli("synth --classes 0 --per-class 5 --dims 2 --out " + (work_dir() / "zero.csv").string()) == 2);
}

TEST_CASE("run produces the requested iteration count") {
  const fs::path pool = make_pool();
  const fs::path init = make_init_file(10);
  const fs::path out = work_dir() / "bsq.json";
  REQUIRE(run_cli("run --pool " + pool.string() + " --strategy bsq --init-file " + init.string() +
                  " --batch 10 --iters 30 --seed 1 --out " + out.string()) == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j["iterations"].size() == 31);
  CHECK(j["iterations"].back()["n_annotated"] == 310);
  CHECK(fs::exists(out.string() + ".manifest.json"));
}

TEST_CASE("run repeated with the same seed is byte-identical") {
  const fs::path pool = make_pool();
  const fs::path init = make_init_file(8);
  const fs::path out_a = work_dir() / "det_a.json";
  const fs::path out_b = work_dir() / "det_b.json";
  const std::string args = "run --pool " + pool.string() + " --strategy bsq --init-file " + init.string() +
                           " --batch 5 --iters 6 --seed 99 --out ";
  REQUIRE(run_cli(args + out_a.string()) == 0);
  REQUIRE(run_cli(args + out_b.string()) == 0);
  CHECK(slurp(out_a) == slurp(out_b));

  // the thread cap must not change any result
  const fs::path out_serial = work_dir() / "det_serial.json";
  const std::string env_cmd = "ALQUERY_THREADS=1 " + std::string(ALQUERY_BIN) + " " + args +
                              out_serial.string() + " >/dev/null 2>&1";
  const int status = std::system(env_cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WEXITSTATUS(status) == 0);
  CHECK(slurp(out_serial) == slurp(out_a));
}

TEST_CASE("upperbound annotates everything in a single iteration") {
  const fs::path pool = make_pool();
  const fs::path init = make_init_file(5);
  const fs::path out = work_dir() / "upper.json";
  REQUIRE(run_cli("run --pool " + pool.string() + " --strategy upperbound --init-file " + init.string() +
                  " --iters 4 --out " + out.string()) == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j["iterations"].size() == 2);
  CHECK(j["iterations"][1]["n_annotated"] == 400);
  CHECK(j["exhausted"] == true);
}

TEST_CASE("unknown strategies and unreadable inputs map to distinct exit codes") {
  const fs::path pool = make_pool();
  const fs::path init = make_init_file(3);
  CHECK(run_cli("run --pool " + pool.string() + " --strategy bogus --init-file " + init.string() +
                " --out " + (work_dir() / "x.json").string()) == 2);
  CHECK(run_cli("run --pool " + (work_dir() / "missing.csv").string() + " --strategy bsq --init-file " +
                init.string() + " --out " + (work_dir() / "y.json").string()) == 1);
  CHECK(run_cli("definitely-not-a-subcommand") == 2);
}

TEST_CASE("embed projects a pool and keeps its metadata columns") {
  const fs::path pool = make_pool();
  const fs::path out = work_dir() / "embedded.csv";
  REQUIRE(run_cli("embed --in " + pool.string() + " --method pca --n-lat 2 --out " + out.string()) == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "id,dim0,dim1,label");
  CHECK(line_count(out) == 401);
}

TEST_CASE("ingest-idx flattens images and attaches labels") {
  const fs::path images = work_dir() / "images.idx";
  const fs::path labels = work_dir() / "labels.idx";
  {
    // 4 images of 2x2, values 0..15
    std::ofstream img(images, std::ios::binary);
    const unsigned char header[] = {0, 0, 8, 3, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0, 2};
    img.write(reinterpret_cast<const char*>(header), sizeof(header));
    for (int i = 0; i < 16; ++i) img.put(static_cast<char>(i));
    std::ofstream lab(labels, std::ios::binary);
    const unsigned char lab_header[] = {0, 0, 8, 1, 0, 0, 0, 4};
    lab.write(reinterpret_cast<const char*>(lab_header), sizeof(lab_header));
    for (int i = 0; i < 4; ++i) lab.put(static_cast<char>(i % 2));
  }
  const fs::path out = work_dir() / "ingested.csv";
  REQUIRE(run_cli("ingest-idx --images " + images.string() + " --labels " + labels.string() +
                  " --out " + out.string()) == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "id,dim0,dim1,dim2,dim3,label");
  CHECK(line_count(out) == 5);
}

TEST_CASE("report emits series and pairwise difference tables") {
  const fs::path pool = make_pool();
  const fs::path init = make_init_file(6);
  const fs::path log_bsq = work_dir() / "r_bsq.json";
  const fs::path log_rnd = work_dir() / "r_rnd.json";
  const std::string common = " --init-file " + init.string() + " --batch 5 --iters 4 --seed 5 --out ";
  REQUIRE(run_cli("run --pool " + pool.string() + " --strategy bsq" + common + log_bsq.string()) == 0);
  REQUIRE(run_cli("run --pool " + pool.string() + " --strategy random" + common + log_rnd.string()) == 0);

  const fs::path out_dir = work_dir() / "report";
  REQUIRE(run_cli("report " + log_bsq.string() + " " + log_rnd.string() + " --out-dir " + out_dir.string()) == 0);

  const fs::path series = out_dir / "series.csv";
  REQUIRE(fs::exists(series));
  // 2 logs x 5 records x 3 metrics (n_annotated, mmd, entropy) + header
  CHECK(line_count(series) == 31);
  REQUIRE(fs::exists(out_dir / "diff_bsq_vs_random.csv"));
  CHECK(line_count(out_dir / "diff_bsq_vs_random.csv") == 6);
  CHECK(fs::exists(series.string() + ".manifest.json"));
}

TEST_CASE("external prediction stacks drive the uncertainty strategy") {
  // tiny pool with known per-sample stack disagreement
  const fs::path pool = work_dir() / "stack_pool.csv";
  {
    std::ofstream out(pool);
    out << "id,dim0\n10,0.0\n11,1.0\n12,2.0\n13,3.0\n";
  }
  const fs::path stacks = work_dir() / "stacks.csv";
  {
    std::ofstream out(stacks);
    out << "sample_id,mc_index,pixel_index,label,probability\n";
    // sample 11 fully confident, 13 split 50/50, 12 mildly split, 10 confident
    const double p[4][2] = {{1.0, 1.0}, {1.0, 1.0}, {0.8, 0.2}, {1.0, 0.0}};
    for (int s = 0; s < 4; ++s) {
      for (int m = 0; m < 2; ++m) out << 10 + s << "," << m << ",0,0," << p[s][m] << "\n";
    }
  }
  const fs::path init = work_dir() / "stack_init.txt";
  {
    std::ofstream out(init);
    out << "10\n";
  }
  const fs::path out = work_dir() / "stack_run.json";
  REQUIRE(run_cli("run --pool " + pool.string() + " --strategy uncertainty --init-file " + init.string() +
                  " --stacks " + stacks.string() + " --batch 1 --iters 1 --out " + out.string()) == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j["iterations"][1]["queried_ids"] == std::vector<long>{13});  // largest vote variance
}

TEST_CASE("config files override run defaults and reject unknown keys") {
  const fs::path pool = make_pool();
  const fs::path init = make_init_file(4);
  const fs::path config = work_dir() / "overrides.cfg";
  {
    std::ofstream out(config);
    out << "# overrides\nmmd_kernel=laplacian\nmmd_sigma=0.5\n";
  }
  const fs::path out = work_dir() / "config_run.json";
  REQUIRE(run_cli("run --pool " + pool.string() + " --strategy random --init-file " + init.string() +
                  " --batch 2 --iters 1 --config " + config.string() + " --out " + out.string()) == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j["config"]["mmd_kernel"] == "laplacian");
  CHECK(j["config"]["mmd_sigma"] == 0.5);

  {
    std::ofstream bad(config, std::ios::trunc);
    bad << "definitely_unknown=1\n";
  }
  CHECK(run_cli("run --pool " + pool.string() + " --strategy random --init-file " + init.string() +
                " --batch 2 --iters 1 --config " + config.string() + " --out " + out.string()) == 2);
}

TEST_CASE("sequential refit mode and eval scoring work end to end") {
  const fs::path pool = make_pool();
  const fs::path init = make_init_file(6);
  const fs::path out = work_dir() / "seq_eval.json";
  REQUIRE(run_cli("run --pool " + pool.string() + " --strategy bsq --bsq-mode sequential_refit" +
                  " --init-file " + init.string() + " --eval " + pool.string() +
                  " --batch 4 --iters 3 --seed 2 --out " + out.string()) == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j["config"]["bsq_mode"] == "sequential_refit");
  for (const auto& rec : j["iterations"]) {
    REQUIRE(rec.contains("dice"));
    CHECK(rec["dice"].get<double>() >= 0.0);
    CHECK(rec["dice"].get<double>() <= 1.0);
  }
}

TEST_CASE("report rejects logs with a mismatched schema") {
  const fs::path bad = work_dir() / "bad_log.json";
  {
    std::ofstream out(bad);
    out << R"({"schema":"alquery-log/999","config":{},"iterations":[]})";
  }
  CHECK(run_cli("report " + bad.string() + " --out-dir " + (work_dir() / "bad_report").string()) == 1);
}
