#include <sstream>

#include "ciskip/synth.hpp"
#include "ciskip/trainer.hpp"
#include "doctest.h"

using namespace ciskip;

TEST_CASE("planted generator hits the requested skip fraction") {
  SynthConfig sc;
  const auto syn = gen_synth(sc);
  CHECK(syn.data.size() == 1000);
  CHECK(syn.data.schema.size() == 26);
  const auto skip = syn.data.count(Label::Skip);
  CHECK(skip >= 80);
  CHECK(skip <= 120);
  CHECK(evaluate(syn.planted.tree, syn.data).f1 == 1.0);
  CHECK(syn.clean_labels == syn.data.labels);
}

TEST_CASE("same seed gives byte-identical CSV") {
  SynthConfig sc;
  sc.seed = 77;
  sc.noise = 0.05;
  std::ostringstream a, b;
  write_csv(a, gen_synth(sc).data);
  write_csv(b, gen_synth(sc).data);
  CHECK(a.str() == b.str());
  sc.seed = 78;
  std::ostringstream c;
  write_csv(c, gen_synth(sc).data);
  CHECK(c.str() != a.str());
}

TEST_CASE("noise flips labels away from the clean ones") {
  SynthConfig sc;
  sc.noise = 0.1;
  const auto syn = gen_synth(sc);
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < syn.data.size(); ++i) flipped += syn.data.labels[i] != syn.clean_labels[i];
  CHECK(flipped > 60);
  CHECK(flipped < 140);
}

TEST_CASE("informative restriction and workflow columns") {
  SynthConfig sc;
  sc.informative = 1;
  sc.features = 8;
  const auto one = gen_synth(sc);
  for (const auto& node : one.planted.tree.nodes()) CHECK(node.attribute == 0);

  SynthConfig wf;
  wf.workflow = true;
  const auto w = gen_synth(wf);
  CHECK(w.data.schema.size() == 29);
  CHECK(w.data.schema[26].name == "PBS");
  CHECK(w.data.schema[26].kind == FeatureKind::Boolean);
  const auto root = w.planted.tree.node(0).attribute;
  CHECK((w.data.schema[root].name == "PBS" || w.data.schema[root].name == "Fail_rate"));
}

TEST_CASE("infeasible requests fail") {
  SynthConfig sc;
  sc.rows = 2;
  CHECK_THROWS_AS(gen_synth(sc), Error);
  sc = {};
  sc.planted_depth = 5;
  CHECK_THROWS_AS(gen_synth(sc), Error);
}
