#include "terralab/config.hpp"

#include <fstream>
#include <functional>

#include "doctest.h"
#include "terralab/common.hpp"
#include "test_util.hpp"

using namespace terralab;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "<no exception>";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("parses keys, comments, and whitespace") {
  const auto cfg = Config::parse_string(
      "# scenario header\n"
      "potential = cubic\n"
      "  potential.a =   0.25   # overrides the default\n"
      "\n"
      "d = 3\n"
      "box = -2 3\n",
      "demo");
  CHECK(cfg.origin() == "demo");
  CHECK(cfg.has("potential"));
  CHECK(!cfg.has("missing"));
  CHECK(cfg.get_string("potential") == "cubic");
  CHECK(cfg.get_real("potential.a") == 0.25);
  CHECK(cfg.get_int("d") == 3);
  const auto box = cfg.get_reals("box");
  REQUIRE(box.size() == 2);
  CHECK(box[0] == -2.0);
  CHECK(box[1] == 3.0);
  CHECK(cfg.keys() == std::vector<std::string>{"potential", "potential.a", "d", "box"});
}

TEST_CASE("fallbacks apply only when the key is absent") {
  const auto cfg = Config::parse_string("dt = 0.5\nverbose = false\n");
  CHECK(cfg.get_real("dt", 1.0) == 0.5);
  CHECK(cfg.get_real("t_end", 1.0) == 1.0);
  CHECK(cfg.get_string("scheme", "imex_cn") == "imex_cn");
  CHECK(cfg.get_bool("verbose", true) == false);
  CHECK(cfg.get_bool("tracker", true) == true);
  CHECK(cfg.get_int("observe_every", 50) == 50);
  CHECK(cfg.get_reals("m", {1.0, 2.0}) == std::vector<double>{1.0, 2.0});
}

TEST_CASE("boolean spellings") {
  const auto cfg = Config::parse_string("a = true\nb = 1\nc = false\nd = 0\ne = yes\n");
  CHECK(cfg.get_bool("a", false));
  CHECK(cfg.get_bool("b", false));
  CHECK(!cfg.get_bool("c", true));
  CHECK(!cfg.get_bool("d", true));
  CHECK(message_of([&] { (void)cfg.get_bool("e", false); }) ==
        "<string>: key 'e' is not a boolean: 'yes'");
}

TEST_CASE("grammar errors carry origin and line number") {
  CHECK(message_of([] { Config::parse_string("just a line\n", "bad.cfg"); }) ==
        "bad.cfg:1: expected 'key = value'");
  CHECK(message_of([] { Config::parse_string("a = 1\n = 2\n", "bad.cfg"); }) ==
        "bad.cfg:2: empty key");
  CHECK(message_of([] { Config::parse_string("a = 1\n# fine\na = 2\n", "bad.cfg"); }) ==
        "bad.cfg:3: duplicate key 'a'");
  CHECK_THROWS_AS(Config::parse_string("x\n"), ConfigError);
}

TEST_CASE("value conversion errors name the key and the text") {
  const auto cfg = Config::parse_string(
      "x = abc\nf = 1.5\nlist = 1 2 oops\nempty =\n", "v.cfg");
  CHECK(message_of([&] { (void)cfg.get_real("x"); }) ==
        "v.cfg: key 'x' is not a real number: 'abc'");
  CHECK(message_of([&] { (void)cfg.get_int("f"); }) ==
        "v.cfg: key 'f' is not an integer: '1.5'");
  CHECK(message_of([&] { (void)cfg.get_reals("list"); }) ==
        "v.cfg: key 'list' has a non-real entry: 'oops'");
  CHECK(message_of([&] { (void)cfg.get_reals("empty"); }) ==
        "v.cfg: key 'empty' is an empty list");
  CHECK(message_of([&] { (void)cfg.get_string("nope"); }) ==
        "v.cfg: missing key 'nope'");
}

TEST_CASE("unread keys are tracked for strict validation") {
  const auto cfg = Config::parse_string("a = 1\nb = 2\nc = 3\n");
  (void)cfg.get_real("b");
  const auto unread = cfg.unread_keys();
  CHECK(unread == std::vector<std::string>{"a", "c"});
  (void)cfg.get_real("a");
  (void)cfg.get_real("c");
  CHECK(cfg.unread_keys().empty());
}

TEST_CASE("echo reproduces entries in input order") {
  const auto cfg = Config::parse_string(
      "zeta = 9\nalpha = 1 2 3\n# gone\nmid = x\n");
  CHECK(cfg.echo() == "zeta = 9\nalpha = 1 2 3\nmid = x\n");
  // echo re-parses to the same entries
  const auto again = Config::parse_string(cfg.echo());
  CHECK(again.keys() == cfg.keys());
  CHECK(again.get_string("mid") == "x");
}

TEST_CASE("file parsing matches string parsing") {
  testutil::ScopedDir dir("cfg");
  const auto path = dir.file("run.cfg");
  std::ofstream(path) << "dt = 0.01\nt_end = 2\n";
  const auto cfg = Config::parse_file(path);
  CHECK(cfg.origin() == path);
  CHECK(cfg.get_real("dt") == 0.01);
  CHECK(message_of([] { Config::parse_file("/nonexistent/x.cfg"); }) ==
        "cannot open config file '/nonexistent/x.cfg'");
}

}  // TEST_SUITE
