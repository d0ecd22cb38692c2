#include "linetension/fields.hpp"

#include "linetension/densities.hpp"
#include "linetension/quadrature.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace linetension;

TEST_CASE("curl of interpolated potential") {
  SECTION("linear potential reproduces its constant curl on every tet") {
    // row 0 potential (0, 0, y): curl = (1, 0, 0)
    PolynomialMatrix phi(3, 3);
    phi.at(0, 2) = Polynomial3::monomial(0, 1, 0);
    const auto mesh = make_kuhn_cube_mesh(2);
    const auto field = curl_of_interpolated_potential(phi, mesh);
    for (const auto& A : field.matrices) {
      CHECK(A(0, 0) == Catch::Approx(1.0));
      CHECK(std::abs(A(0, 1)) < 1e-14);
      CHECK(std::abs(A(0, 2)) < 1e-14);
      CHECK(A.row(1).norm() < 1e-14);
      CHECK(A.row(2).norm() < 1e-14);
    }
  }

  SECTION("quadratic potential: L1 interpolation error decays at least linearly") {
    const PolynomialMatrix phi = oracle::quadratic_potential();
    const PolynomialMatrix curl = phi.row_curl();
    std::vector<double> rs, errs;
    for (int n : {1, 2, 4}) {
      const auto mesh = make_kuhn_cube_mesh(n);
      const auto field = curl_of_interpolated_potential(phi, mesh);
      double err = 0;
      for (std::size_t i = 0; i < field.matrices.size(); ++i) {
        const auto& A = field.matrices[i];
        err += integrate_tet(mesh.tets()[i].vertices(), 4,
                             [&](const Vec3& x) { return (curl(x) - A).norm(); });
      }
      rs.push_back(1.0 / n);
      errs.push_back(err);
    }
    const double slope = fit_loglog_slope(rs, errs);  // error vs mesh size r
    INFO("fitted L1 error order: " << slope);
    CHECK(slope >= 0.9);
  }

  SECTION("curl-built fields satisfy the normal-jump condition") {
    const auto mesh = make_kuhn_cube_mesh(2);
    const auto field = curl_of_interpolated_potential(oracle::quadratic_potential(), mesh);
    CHECK(check_normal_jumps(field).pass(1e-10));
  }
}

TEST_CASE("normal jump checks") {
  SECTION("constant field has zero violation") {
    const auto mesh = make_unit_cube_6tet();
    std::vector<FieldMat> mats(6, oracle::random_matrix(3, 5));
    const PiecewiseConstantField field(mesh, mats);
    CHECK(check_normal_jumps(field).max_violation == 0.0);
  }

  SECTION("hand-built violation is detected with the offending face") {
    // two tets sharing the x = 0 face with normal e1
    std::vector<Tetra> tets = {
        Tetra({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}),
        Tetra({Vec3(0, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)})};
    Triangulation mesh(tets);
    REQUIRE(mesh.conformity().conforming);
    FieldMat A1 = FieldMat::Zero(3, 3);
    A1(0, 0) = 1.0;  // e1 (x) e1
    std::vector<FieldMat> mats = {A1, FieldMat::Zero(3, 3)};
    const PiecewiseConstantField field(mesh, mats);
    const auto rep = check_normal_jumps(field);
    CHECK(rep.max_violation == Catch::Approx(1.0));
    CHECK_FALSE(rep.pass(1e-10));
    REQUIRE(rep.worst_face >= 0);
    CHECK(mesh.faces()[rep.worst_face].interior());
  }
}

TEST_CASE("coordinate rank-one decomposition") {
  SECTION("single entry") {
    FieldMat A = FieldMat::Zero(3, 3);
    A(0, 0) = 1.0;
    const auto d = coordinate_rank_one_decomposition(A);
    REQUIRE(d.terms.size() == 1);
    CHECK(d.terms[0].b[0] == 1.0);
    CHECK(d.terms[0].t == Vec3(1, 0, 0));
  }
  SECTION("zero matrix gives the empty decomposition") {
    CHECK(coordinate_rank_one_decomposition(FieldMat::Zero(3, 3)).terms.empty());
  }
  SECTION("re-sum is exact and the term count is at most 3N") {
    for (std::uint64_t seed : {1, 2, 3, 4}) {
      const FieldMat A = oracle::random_matrix(3, seed);
      const auto d = coordinate_rank_one_decomposition(A);
      CHECK(int(d.terms.size()) <= 9);
      CHECK((d.reconstruct() - A).norm() == 0.0);
      for (const auto& term : d.terms) {
        // b is a multiple of a standard basis vector, t a standard axis
        int nzb = 0;
        for (int i = 0; i < term.b.size(); ++i) nzb += term.b[i] != 0.0;
        CHECK(nzb == 1);
        CHECK(term.t.lpNorm<1>() == 1.0);
      }
    }
  }
}

TEST_CASE("e0 energy") {
  const auto nuclear = [](const FieldMat& A) { return oracle::nuclear_norm(A); };

  SECTION("zero field has zero energy") {
    const auto mesh = make_single_tet();
    const PiecewiseConstantField field(mesh, {FieldMat::Zero(3, 3)});
    CHECK(e0_energy(field, nuclear, mesh.domain()) == 0.0);
  }

  SECTION("isotropic density on a rank-one field gives |b| vol(T)") {
    const auto mesh = make_single_tet();
    Burgers b(3);
    b << 2, 1, 0;
    const Vec3 t = Vec3(1, 2, 2).normalized();
    std::vector<FieldMat> mats = {b * t.transpose()};
    const PiecewiseConstantField field(mesh, mats);
    const double vol = mesh.tets()[0].volume();
    // SVD oracle: the nuclear norm of a rank-one matrix is |b|
    CHECK(e0_energy(field, nuclear, mesh.domain()) == Catch::Approx(b.norm() * vol));
    // certified envelope agrees for in-dictionary directions
    Density psi = Density::isotropic(3);
    Recession rec(psi);
    EnvelopeSolver env(rec, {.z_max = 2, .directions = 64, .lp_tol = 1e-9});
    const double via_env =
        e0_energy(field, [&](const FieldMat& A) { return env.solve(A).value; }, mesh.domain());
    CHECK(via_env == Catch::Approx(b.norm() * vol).epsilon(1e-9));
  }

  SECTION("additivity over tets and 1-homogeneity") {
    const auto mesh = make_unit_cube_6tet();
    std::vector<FieldMat> mats;
    for (std::uint64_t i = 0; i < 6; ++i) mats.push_back(oracle::random_matrix(3, i));
    const PiecewiseConstantField field(mesh, mats);
    double per_tet = 0;
    for (std::size_t i = 0; i < 6; ++i)
      per_tet += oracle::nuclear_norm(mats[i]) * mesh.tets()[i].volume();
    CHECK(e0_energy(field, nuclear, mesh.domain()) == Catch::Approx(per_tet));

    std::vector<FieldMat> scaled;
    for (const auto& A : mats) scaled.push_back(2.5 * A);
    const PiecewiseConstantField field2(mesh, scaled);
    CHECK(e0_energy(field2, nuclear, mesh.domain()) ==
          Catch::Approx(2.5 * e0_energy(field, nuclear, mesh.domain())));
  }

  SECTION("the domain box clips tet volumes") {
    const auto mesh = make_single_tet();
    std::vector<FieldMat> mats = {FieldMat::Identity(3, 3)};
    const PiecewiseConstantField field(mesh, mats);
    const AABox half{Vec3(0, 0, 0), Vec3(0.25, 1, 1)};
    const double full = e0_energy(field, nuclear, mesh.domain());
    const double part = e0_energy(field, nuclear, half);
    CHECK(part < full);
    CHECK(part == Catch::Approx(oracle::nuclear_norm(mats[0]) *
                                tet_box_volume(mesh.tets()[0], half)));
  }
}

TEST_CASE("field and potential file formats") {
  SECTION("field matrices round trip") {
    const auto mesh = make_unit_cube_6tet();
    std::vector<FieldMat> mats;
    for (std::uint64_t i = 0; i < 6; ++i) mats.push_back(oracle::random_matrix(3, 10 + i));
    const PiecewiseConstantField field(mesh, mats);
    std::ostringstream out;
    save_field_csv(field, out);
    std::istringstream in(out.str());
    const auto back = load_field_matrices(in, 6);
    for (int i = 0; i < 6; ++i) CHECK(back[i] == mats[i]);
  }

  SECTION("missing tet rows are reported") {
    std::istringstream in("tet,a11,a12,a13,a21,a22,a23,a31,a32,a33\n0,1,0,0,0,0,0,0,0,0\n");
    CHECK_THROWS_WITH(load_field_matrices(in, 2),
                      Catch::Matchers::ContainsSubstring("missing matrix"));
  }

  SECTION("potential coefficient list") {
    std::istringstream in(
        "row,comp,ax,ay,az,coeff\n"
        "1,3,0,1,0,1\n");  // row 1, z-component, monomial y
    const auto phi = load_potential_csv(in, 3);
    const auto mesh = make_single_tet();
    const auto field = curl_of_interpolated_potential(phi, mesh);
    CHECK(field.matrices[0](0, 0) == Catch::Approx(1.0));
  }

  SECTION("potential rows out of range are rejected") {
    std::istringstream in("row,comp,ax,ay,az,coeff\n9,1,0,0,0,1\n");
    CHECK_THROWS_WITH(load_potential_csv(in, 3),
                      Catch::Matchers::ContainsSubstring("out of range"));
  }
}
