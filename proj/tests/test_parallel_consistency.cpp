// Copyright 2026 The gbp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The OpenMP kernels only split work across independent output columns, so
// they must agree with the serial reference bit for bit, including on sizes
// large enough to take the parallel path.

#include <doctest.h>

#include "test_support.hpp"

using namespace gbp;
using gbp::test::random_matrix;

TEST_SUITE_BEGIN("parallel");

TEST_CASE("matmul agrees with the serial reference bitwise") {
  // Below and above the parallel work cutoff.
  const int sizes[][3] = {{5, 3, 4}, {17, 9, 13}, {96, 80, 72}, {150, 40, 190}};
  for (const auto& s : sizes) {
    const Matrix a = random_matrix(s[0], s[1], 7 * s[0] + s[2]);
    const Matrix b = random_matrix(s[1], s[2], 13 * s[1] + s[0]);
    CHECK(linalg::matmul(a, b) == linalg::serial::matmul(a, b));
  }
}

TEST_CASE("sym agrees with the serial reference bitwise") {
  const Matrix a = random_matrix(33, 33, 5);
  CHECK(linalg::sym(a) == linalg::serial::sym(a));
}

TEST_CASE("householder_qr agrees with the serial reference bitwise") {
  const int shapes[][2] = {{6, 4}, {40, 12}, {160, 48}, {260, 90}};
  for (const auto& s : shapes) {
    const Matrix a = random_matrix(s[0], s[1], 11 * s[0] + s[1]);
    const linalg::QrResult par = linalg::householder_qr(a);
    const linalg::QrResult ser = linalg::serial::householder_qr(a);
    CHECK(par.q == ser.q);
    CHECK(par.r == ser.r);
  }
}

TEST_CASE("qf agrees with the serial reference bitwise") {
  const Matrix a = random_matrix(200, 64, 21);
  CHECK(linalg::qf(a) == linalg::serial::qf(a));
}

TEST_SUITE_END();
