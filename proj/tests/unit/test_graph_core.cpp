#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"
#include "regionflow/errors.hpp"
#include "regionflow/geometry.hpp"
#include "regionflow/io.hpp"
#include "regionflow/network.hpp"
#include "regionflow/synth.hpp"

using namespace regionflow;
using testing_support::TempDir;

namespace {

Geometry square(double x, double y, double size = 1.0) {
  return {Polygon{{Ring{{x, y}, {x + size, y}, {x + size, y + size}, {x, y + size}}}}};
}

std::vector<Geometry> grid(int rows, int cols) {
  std::vector<Geometry> g;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) g.push_back(square(c, r));
  return g;
}

std::string feature(const std::string& id, const std::string& geometry) {
  return R"({"type":"Feature","properties":{"id":")" + id + R"("},"geometry":)" + geometry + "}";
}

std::string collection(const std::vector<std::string>& features) {
  std::string body;
  for (std::size_t i = 0; i < features.size(); ++i) body += (i ? "," : "") + features[i];
  return R"({"type":"FeatureCollection","features":[)" + body + "]}";
}

const std::string kUnitSquare = R"({"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]})";

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("single square feature parses") {
    TempDir dir;
    auto path = dir.write("one.geojson", collection({feature("t1", kUnitSquare)}));
    GeometryTable t = load_geometries(path);
    REQUIRE(t.node_ids == std::vector<std::string>{"t1"});
    REQUIRE(t.geometries.size() == 1);
    const Ring& ring = t.geometries[0][0].rings[0];
    CHECK(ring.size() == 4);  // closing vertex dropped
    CHECK(ring[2] == Point{1, 1});
    CHECK(area(t.geometries[0]) == doctest::Approx(1.0));
  }

  TEST_CASE("duplicate ids are rejected") {
    TempDir dir;
    auto path = dir.write("dup.geojson", collection({feature("t1", kUnitSquare), feature("t1", kUnitSquare)}));
    CHECK_THROWS_AS(load_geometries(path), ValidationError);
  }

  TEST_CASE("errors name the offending feature index") {
    TempDir dir;
    auto no_id = dir.write("a.geojson", collection({feature("ok", kUnitSquare),
                                                    R"({"type":"Feature","properties":{},"geometry":)" + kUnitSquare + "}"}));
    CHECK_THROWS_WITH_AS(load_geometries(no_id), doctest::Contains("feature 1"), ValidationError);
    auto point = dir.write("b.geojson", collection({feature("p", R"({"type":"Point","coordinates":[0,0]})")}));
    CHECK_THROWS_WITH_AS(load_geometries(point), doctest::Contains("feature 0"), ValidationError);
    auto broken = dir.write("c.geojson", "{\"type\": \"FeatureCollection\", ");
    CHECK_THROWS_AS(load_geometries(broken), ValidationError);
    auto numeric_id = dir.write("d.geojson", R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"id":7},"geometry":)" + kUnitSquare + "}]}");
    CHECK_THROWS_AS(load_geometries(numeric_id), ValidationError);
  }

  TEST_CASE("multipolygon and holes") {
    TempDir dir;
    const std::string multi =
        R"({"type":"MultiPolygon","coordinates":[[[[0,0],[4,0],[4,4],[0,4],[0,0]],[[1,1],[2,1],[2,2],[1,2],[1,1]]],[[[10,0],[11,0],[11,1],[10,1],[10,0]]]]})";
    auto path = dir.write("m.geojson", collection({feature("m", multi)}));
    GeometryTable t = load_geometries(path);
    REQUIRE(t.geometries[0].size() == 2);
    CHECK(t.geometries[0][0].rings.size() == 2);
    CHECK(area(t.geometries[0]) == doctest::Approx(16.0 - 1.0 + 1.0));
  }

  TEST_CASE("lattice from synth round-trips through GeoJSON") {
    SynthConfig c;
    c.lattice_size = 2;
    c.planted_communities = 4;
    c.seed = 3;
    SynthNetwork s = generate(c);
    TempDir dir;
    save_geometries(dir / "cells.geojson", {s.network.node_ids, s.network.geometries});
    GeometryTable back = load_geometries(dir / "cells.geojson");
    CHECK(back.node_ids == s.network.node_ids);
    CHECK(back.geometries == s.network.geometries);
  }

  TEST_CASE("rook and queen on two squares") {
    auto edge = derive_adjacency({square(0, 0), square(1, 0)}, Contiguity::rook);
    CHECK(edge(0, 1) == 1.0);
    CHECK(edge(1, 0) == 1.0);
    std::vector<Geometry> corner{square(0, 0), square(1, 1)};
    CHECK(derive_adjacency(corner, Contiguity::rook)(0, 1) == 0.0);
    CHECK(derive_adjacency(corner, Contiguity::queen)(0, 1) == 1.0);
  }

  TEST_CASE("3x3 lattice rook degrees") {
    Matrix a = derive_adjacency(grid(3, 3), Contiguity::rook);
    std::vector<int> degree;
    for (int i = 0; i < 9; ++i) degree.push_back(static_cast<int>(a.row(i).sum()));
    CHECK(degree == std::vector<int>{2, 3, 2, 3, 4, 3, 2, 3, 2});
    std::vector<int> sorted = degree;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{2, 2, 2, 2, 3, 3, 3, 3, 4});
    CHECK(a == oracle::lattice(3, 3));
    Matrix q = derive_adjacency(grid(3, 3), Contiguity::queen);
    CHECK(q.row(4).sum() == 8.0);
    CHECK(q.row(0).sum() == 3.0);
  }

  TEST_CASE("tolerance snaps nearly shared edges") {
    std::vector<Geometry> g{square(0, 0), {Polygon{{Ring{{1.0000004, 0}, {2, 0}, {2, 1}, {1.0000004, 1}}}}}};
    CHECK(derive_adjacency(g, Contiguity::rook, 0.0)(0, 1) == 0.0);
    CHECK(derive_adjacency(g, Contiguity::rook, 1e-3)(0, 1) == 1.0);
    CHECK_THROWS_AS(derive_adjacency(g, Contiguity::rook, -1.0), ValidationError);
  }

  TEST_CASE("degenerate polygon is rejected") {
    std::vector<Geometry> g{square(0, 0), {Polygon{{Ring{{0, 0}, {1, 0}, {2, 0}}}}}};
    CHECK_THROWS_AS(derive_adjacency(g, Contiguity::rook), ValidationError);
  }

  TEST_CASE("adjacency is equivariant under polygon permutation") {
    std::mt19937_64 rng(11);
    std::vector<Geometry> g = grid(4, 5);
    Matrix a = derive_adjacency(g, Contiguity::queen);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<int> perm(g.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<Geometry> shuffled;
      for (int p : perm) shuffled.push_back(g[p]);
      Matrix b = derive_adjacency(shuffled, Contiguity::queen);
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) REQUIRE(b(i, j) == a(perm[i], perm[j]));
    }
  }

  TEST_CASE("islands are linked only on request") {
    std::vector<Geometry> g{square(0, 0), square(1, 0), square(5, 0)};
    Matrix a = derive_adjacency(g, Contiguity::rook);
    CHECK(a.row(2).sum() == 0.0);
    connect_islands(a, g);
    CHECK(a(2, 1) == 1.0);
    CHECK(a(1, 2) == 1.0);
    CHECK(a(2, 0) == 0.0);
  }
}

TEST_SUITE("flows and attributes") {
  const std::vector<std::string> ids{"a", "b", "c"};

  TEST_CASE("symmetrization of a single row") {
    TempDir dir;
    Matrix s = load_flows(dir.write("f.csv", "origin,destination,weight\na,b,3\n"), ids, true);
    CHECK(s(0, 1) == 3.0);
    CHECK(s(1, 0) == 3.0);
  }

  TEST_CASE("duplicate rows are summed before symmetrization") {
    TempDir dir;
    auto path = dir.write("f.csv", "origin,destination,weight\na,b,2\na,b,5\n");
    Matrix raw = load_flows(path, ids, false);
    CHECK(raw(0, 1) == 7.0);
    CHECK(raw(1, 0) == 0.0);
    Matrix sym = load_flows(path, ids, true);
    CHECK(sym(0, 1) == 7.0);
    CHECK(sym(1, 0) == 7.0);
  }

  TEST_CASE("opposite directions add once") {
    TempDir dir;
    Matrix s = load_flows(dir.write("f.csv", "origin,destination,weight\na,b,2\nb,a,4\nc,c,9\n"), ids, true);
    CHECK(s(0, 1) == 6.0);
    CHECK(s(1, 0) == 6.0);
    CHECK(s(2, 2) == 9.0);  // diagonal kept as given
  }

  TEST_CASE("bad rows report their row number") {
    TempDir dir;
    CHECK_THROWS_WITH_AS(load_flows(dir.write("u.csv", "origin,destination,weight\na,b,1\na,zz,2\n"), ids, true),
                         doctest::Contains("3"), ValidationError);
    CHECK_THROWS_WITH_AS(load_flows(dir.write("n.csv", "origin,destination,weight\na,b,-1\n"), ids, true),
                         doctest::Contains("2"), ValidationError);
    CHECK_THROWS_AS(load_flows(dir.write("h.csv", "from,to,w\na,b,1\n"), ids, true), ValidationError);
  }

  TEST_CASE("symmetrized flows are symmetric for any orientation") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> node(0, 2), w(0, 9);
    for (int trial = 0; trial < 20; ++trial) {
      std::string csv = "origin,destination,weight\n";
      for (int r = 0; r < 6; ++r) csv += ids[node(rng)] + "," + ids[node(rng)] + "," + std::to_string(w(rng)) + "\n";
      TempDir dir;
      Matrix s = load_flows(dir.write("f.csv", csv), ids, true);
      CHECK(s == s.transpose());
    }
  }

  TEST_CASE("min-max scaling") {
    Matrix raw(3, 1);
    raw << 10, 20, 30;
    ScaledAttributes s = scale_attributes(raw, {"x"});
    CHECK(s.values(0, 0) == 0.0);
    CHECK(s.values(1, 0) == 0.5);
    CHECK(s.values(2, 0) == 1.0);
    CHECK(s.features[0].min == 10.0);
    CHECK(s.features[0].max == 30.0);
    CHECK_FALSE(s.features[0].constant);
  }

  TEST_CASE("constant column maps to one half") {
    Matrix raw(3, 1);
    raw << 7, 7, 7;
    ScaledAttributes s = scale_attributes(raw, {"x"});
    CHECK(s.values.col(0) == Eigen::VectorXd::Constant(3, 0.5));
    CHECK(s.features[0].constant);
  }

  TEST_CASE("features scale independently and scaling is idempotent") {
    Matrix raw(2, 2);
    raw << 0, 1, 4, 3;
    ScaledAttributes s = scale_attributes(raw, {"a", "b"});
    CHECK(s.values(0, 0) == 0.0);
    CHECK(s.values(1, 0) == 1.0);
    CHECK(s.values(0, 1) == 0.0);
    CHECK(s.values(1, 1) == 1.0);
    std::mt19937_64 rng(2);
    Matrix x = oracle::random_attributes(7, 3, rng) * 13.0;
    Matrix once = scale_attributes(x, {"a", "b", "c"}).values;
    Matrix twice = scale_attributes(once, {"a", "b", "c"}).values;
    CHECK((once - twice).cwiseAbs().maxCoeff() <= 1e-15);
  }

  TEST_CASE("attribute file errors") {
    TempDir dir;
    auto good = load_attributes(dir.write("a.csv", "id,x,y\nc,1,2\na,3,2\nb,5,2\n"), ids);
    CHECK(good.values(0, 0) == 0.5);  // row order follows node_ids
    CHECK(good.values(2, 0) == 0.0);
    CHECK(good.features[1].constant);
    CHECK_THROWS_AS(load_attributes(dir.write("m.csv", "id,x\na,1\nb,2\n"), ids), ValidationError);
    CHECK_THROWS_AS(load_attributes(dir.write("n.csv", "id,x\na,1\nb,oops\nc,2\n"), ids), ValidationError);
  }
}

TEST_SUITE("hops") {
  TEST_CASE("small examples") {
    HopMatrix h = compute_hops(oracle::path(3));
    CHECK(h(0, 2) == 2);
    Matrix two = Matrix::Zero(2, 2);
    CHECK(compute_hops(two)(0, 1) == HopMatrix::unreachable);
    CHECK(compute_hops(oracle::lattice(4, 4))(0, 15) == 6);
  }

  TEST_CASE("agree with Floyd-Warshall on random graphs") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 1 + trial % 12;
      Matrix a = oracle::random_adjacency(n, rng, 0.2, trial % 3 != 0);
      HopMatrix h = compute_hops(a);
      auto fw = oracle::floyd_warshall(a);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const long expected = fw[i][j] >= oracle::kInf ? HopMatrix::unreachable : fw[i][j];
          REQUIRE(h(i, j) == expected);
          REQUIRE(h(i, j) == h(j, i));
          REQUIRE((h(i, j) == 1) == (a(i, j) == 1.0));
          for (int k = 0; k < n; ++k)
            if (h(i, k) != HopMatrix::unreachable && h(k, j) != HopMatrix::unreachable)
              REQUIRE(h(i, j) <= h(i, k) + h(k, j));
        }
    }
  }

  TEST_CASE("components") {
    Matrix a = Matrix::Zero(5, 5);
    a(0, 1) = a(1, 0) = 1;
    a(3, 4) = a(4, 3) = 1;
    int count = 0;
    auto comp = connected_components(a, &count);
    CHECK(count == 3);
    CHECK(comp[0] == comp[1]);
    CHECK(comp[3] == comp[4]);
    CHECK(comp[2] != comp[0]);
  }
}

TEST_SUITE("network assembly") {
  TEST_CASE("assemble, save and load") {
    TempDir dir;
    std::vector<std::string> feats;
    const char* names[] = {"a", "b", "c", "d"};
    for (int i = 0; i < 4; ++i)
      feats.push_back(feature(names[i], R"({"type":"Polygon","coordinates":[[[)" + std::to_string(i) + ",0],[" +
                                            std::to_string(i + 1) + ",0],[" + std::to_string(i + 1) + ",1],[" +
                                            std::to_string(i) + ",1]]]}"));
    auto geo = dir.write("g.geojson", collection(feats));
    auto flows = dir.write("f.csv", "origin,destination,weight\na,b,4\nb,a,1\nc,d,2.5\n");
    auto attrs = dir.write("x.csv", "id,pop,inc\na,1,5\nb,2,5\nc,3,5\nd,5,5\n");
    SpatialNetwork net = assemble_network(geo, flows, attrs, {});
    CHECK(net.size() == 4);
    CHECK(net.adjacency == oracle::path(4));
    CHECK(net.flows(0, 1) == 5.0);
    CHECK(net.flows(3, 2) == 2.5);
    CHECK(net.attributes(3, 0) == 1.0);
    CHECK(net.attributes(0, 1) == 0.5);
    save_network(dir / "net", net);
    for (const char* f : {"nodes.csv", "adjacency.csv", "flows.csv", "attributes.csv", "meta.json", "geometry.geojson"})
      CHECK(std::filesystem::exists(dir / "net" / f));
    SpatialNetwork back = load_network(dir / "net");
    CHECK(back.node_ids == net.node_ids);
    CHECK(back.adjacency == net.adjacency);
    CHECK(back.flows == net.flows);
    CHECK(back.attributes == net.attributes);
    CHECK(back.geometries == net.geometries);
    CHECK(back.features.size() == 2);
    CHECK(back.rule == Contiguity::rook);
  }

  TEST_CASE("validate catches broken invariants") {
    std::mt19937_64 rng(1);
    SpatialNetwork net = oracle::make_network(oracle::path(3), oracle::random_flows(3, rng), oracle::random_attributes(3, 2, rng));
    CHECK_NOTHROW(net.validate());
    SpatialNetwork bad = net;
    bad.adjacency(0, 2) = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = net;
    bad.flows(0, 1) = -1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = net;
    bad.attributes(1, 1) = 1.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = net;
    bad.node_ids[2] = "n0";
    CHECK_THROWS_AS(bad.validate(), ValidationError);
  }
}

TEST_SUITE("io") {
  TEST_CASE("csv quoting and blank lines") {
    TempDir dir;
    auto t = io::read_csv(dir.write("q.csv", "\xEF\xBB\xBFh1,h2\n\"a,b\",\"say \"\"hi\"\"\"\n\nx,y\n"));
    CHECK(t.header == std::vector<std::string>{"h1", "h2"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].cells[0] == "a,b");
    CHECK(t.rows[0].cells[1] == "say \"hi\"");
    CHECK(t.rows[1].line == 4);
    CHECK_THROWS_AS(io::read_csv(dir.write("bad.csv", "a,b\n1\n")), ValidationError);
  }

  TEST_CASE("number round trip") {
    for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 123456.789, M_PI})
      CHECK(io::parse_double(io::format_double(v), "v") == v);
    CHECK_THROWS_AS(io::parse_double("1.5x", "v"), ValidationError);
    CHECK_THROWS_AS(io::parse_double("", "v"), ValidationError);
  }
}
