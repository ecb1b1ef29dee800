#ifndef MINIMAXDL_TESTS_FIXTURES_HPP_
#define MINIMAXDL_TESTS_FIXTURES_HPP_

#include "minimaxdl/model.hpp"

namespace minimaxdl::fixtures {

// 6 x 10 dictionary [I_6 | B / sqrt(6)] with four sign vectors B whose
// pairwise inner products are 0 or +-2; every pair of columns has
// |<d_i, d_j>| <= 1/sqrt(6), so delta_2 = 1/sqrt(6) < 1/2.
inline DictionaryMatrix low_coherence_6x10() {
  Matrix D = Matrix::Zero(6, 10);
  D.leftCols(6).setIdentity();
  const int signs[4][6] = {{1, 1, 1, 1, 1, 1},
                           {1, 1, 1, -1, -1, -1},
                           {1, -1, 1, -1, 1, -1},
                           {-1, 1, 1, -1, -1, 1}};
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 6; ++i) D(i, 6 + c) = signs[c][i] / std::sqrt(6.0);
  return DictionaryMatrix(D);
}

}  // namespace minimaxdl::fixtures

#endif  // MINIMAXDL_TESTS_FIXTURES_HPP_
