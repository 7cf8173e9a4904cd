// Prints the four label-kernel variants for one small labeling so the
// masking and reweighting rules are easy to eyeball: variant 1 ignores
// labels, 2 and 3 gate on class agreement (with different weights), and 4
// rescales source samples toward the target's class proportions.
#include "ujmmd/kernels.hpp"

#include <cstdio>

int main() {
    using namespace ujmmd;
    const HardLabels source({0, 0, 1}, 2);
    const HardLabels target({0, 1, 1, 1}, 2);

    std::printf("source labels: 0 0 1   target labels: 0 1 1 1\n");
    for (int variant = 1; variant <= 4; ++variant) {
        const KernelMatrix K = label_kernel(variant, source, target, 2);
        const PsdReport rep = psd_report(K, 1e-8);
        std::printf("\nvariant %d (min eigenvalue %.2e)\n", variant,
                    rep.min_eigenvalue);
        for (int i = 0; i < K.size(); ++i) {
            for (int j = 0; j < K.size(); ++j)
                std::printf(" %6.3f", K.values(i, j));
            std::printf("\n");
        }
    }
    return 0;
}
