#include "osfp/preprocess.hpp"

#include <cstdio>
#include <sstream>

#include "osfp/encoding.hpp"

namespace osfp {

std::string reduction_report(const ReductionPipeline<double>& pipeline) {
    const auto& layout = NmapLayout::canonical();
    const bool nmap = pipeline.input_size() == static_cast<Eigen::Index>(layout.size());
    std::ostringstream out;
    out << "Index  Old index  Field\n";
    for (std::size_t i = 0; i < pipeline.kept.size(); ++i) {
        const auto old = static_cast<std::size_t>(pipeline.kept[i]);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%5zu  %9zu  ", i, old);
        out << buf;
        if (nmap) {
            const auto& e = layout.at(old);
            out << to_string(e.test) << " : " << e.field << ' ' << e.sub_feature;
        } else {
            out << "input " << old;
        }
        out << '\n';
    }
    out << "kept " << pipeline.kept.size() << " of " << pipeline.input_size() << " columns; " << pipeline.output_size()
        << " principal components retain " << pipeline.variance_kept * 100.0 << "% of the variance\n";
    return out.str();
}

}  // namespace osfp
