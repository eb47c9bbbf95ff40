#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "varpro/io.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string command = std::string(VARPRO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "varpro_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("successful runs exit 0 and write the manifest") {
  const fs::path dir = fresh_dir("ok");
  CHECK(run_cli("appendix-b --out-dir " + dir.string()) == 0);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "appendix_b.json"));

  const fs::path dir2 = fresh_dir("classify");
  CHECK(run_cli("classify --problem cubic --candidates \"-1;3\" --out-dir " + dir2.string()) == 0);
  CHECK(fs::exists(dir2 / "classify_reports.json"));
}

TEST_CASE("validation problems exit 1") {
  CHECK(run_cli("classify --problem no-such-problem --candidates 0 --out-dir " +
                fresh_dir("bad_problem").string()) == 1);
  CHECK(run_cli("classify --problem cubic --candidates abc --out-dir " +
                fresh_dir("bad_candidates").string()) == 1);
  CHECK(run_cli("landscape --model nope --out-dir " + fresh_dir("bad_model").string()) == 1);
  CHECK(run_cli("no-such-subcommand") == 1);
}

TEST_CASE("io failures exit 2") {
  // Parent path is a file, so the output directory cannot be created.
  const fs::path parent = fresh_dir("io");
  varpro::write_file(parent / "blocker", "x");
  CHECK(run_cli("appendix-b --out-dir " + (parent / "blocker" / "sub").string()) == 2);
}
