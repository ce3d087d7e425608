// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#include "lpmrf/features/extractor.hpp"

namespace lpmrf::features {

metrics::FeatureSet extract_features(const FeatureExtractor<float>& extractor,
                                     const std::vector<Image>& images) {
    LPMRF_REQUIRE(!images.empty(), ParamError, "extract_features: empty image set");
    const int n = int(images.size());
    const int h = images[0].dim(1), w = images[0].dim(2);

    metrics::FeatureSet set;
    set.extractor_id = extractor.id();
    set.features = Tensor<double>({n, extractor.dim()});

    const int chunk = 32;
    for (int start = 0; start < n; start += chunk) {
        const int count = std::min(chunk, n - start);
        Tensor<float> batch({count, 3, h, w});
        for (int i = 0; i < count; ++i) {
            const Image& img = images[size_t(start + i)];
            LPMRF_REQUIRE(img.dim(1) == h && img.dim(2) == w, ShapeError,
                          "extract_features: inconsistent image sizes");
            std::copy(img.data(), img.data() + img.numel(),
                      batch.data() + int64_t(i) * img.numel());
        }
        Tensor<float> pooled = extractor.pooled(batch);
        for (int i = 0; i < count; ++i)
            for (int d = 0; d < extractor.dim(); ++d)
                set.features.at(start + i, d) = double(pooled.at(i, d));
    }
    return set;
}

}  // namespace lpmrf::features
