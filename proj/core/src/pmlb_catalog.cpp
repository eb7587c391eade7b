#include <algorithm>
#include <cstdint>

#include "maclab/pmlb.hpp"

namespace maclab {
namespace {

// Snapshot of the upstream regression corpus. Row and feature counts were
// recorded when the list was pinned and drive the row-cap filter only;
// fetched files are verified against the checksums in the cache manifest,
// not against these counts.
struct CatalogRow {
  const char* name;
  std::int64_t rows;
  int features;
};

constexpr CatalogRow kCatalog[] = {
    {"1027_ESL", 488, 4},
    {"1028_SWD", 1000, 10},
    {"1029_LEV", 1000, 4},
    {"1030_ERA", 1000, 4},
    {"1089_USCrime", 47, 13},
    {"1096_FacultySalaries", 50, 4},
    {"1191_BNG_pbc", 1000000, 18},
    {"1193_BNG_lowbwt", 31104, 9},
    {"1196_BNG_pharynx", 1000000, 10},
    {"1199_BNG_echoMonths", 17496, 9},
    {"1201_BNG_breastTumor", 116640, 9},
    {"1203_BNG_pwLinear", 177147, 10},
    {"1595_poker", 1025010, 10},
    {"192_vineyard", 52, 2},
    {"195_auto_price", 159, 15},
    {"197_cpu_act", 8192, 21},
    {"201_pol", 15000, 48},
    {"207_autoPrice", 159, 15},
    {"210_cloud", 108, 5},
    {"215_2dplanes", 40768, 10},
    {"218_house_8L", 22784, 8},
    {"225_puma8NH", 8192, 8},
    {"227_cpu_small", 8192, 12},
    {"228_elusage", 55, 2},
    {"229_pwLinear", 200, 10},
    {"230_machine_cpu", 209, 6},
    {"294_satellite_image", 6435, 36},
    {"344_mv", 40768, 10},
    {"4544_GeographicalOriginalofMusic", 1059, 117},
    {"485_analcatdata_vehicle", 48, 4},
    {"503_wind", 6574, 14},
    {"505_tecator", 240, 124},
    {"519_vinnie", 380, 2},
    {"522_pm10", 500, 7},
    {"523_analcatdata_neavote", 100, 2},
    {"527_analcatdata_election2000", 67, 14},
    {"529_pollen", 3848, 4},
    {"537_houses", 20640, 8},
    {"542_pollution", 60, 15},
    {"547_no2", 500, 7},
    {"556_analcatdata_apnea2", 475, 3},
    {"557_analcatdata_apnea1", 475, 3},
    {"558_analcatdata_apnea3", 450, 3},
    {"560_bodyfat", 252, 14},
    {"561_cpu", 209, 7},
    {"562_cpu_small", 8192, 12},
    {"564_fried", 40768, 10},
    {"573_cpu_act", 8192, 21},
    {"574_house_16H", 22784, 16},
    {"579_fri_c0_250_5", 250, 5},
    {"581_fri_c3_500_25", 500, 25},
    {"582_fri_c1_500_25", 500, 25},
    {"583_fri_c1_1000_50", 1000, 50},
    {"584_fri_c4_500_25", 500, 25},
    {"586_fri_c3_1000_25", 1000, 25},
    {"588_fri_c4_1000_100", 1000, 100},
    {"589_fri_c2_1000_25", 1000, 25},
    {"590_fri_c0_1000_50", 1000, 50},
    {"591_fri_c1_100_10", 100, 10},
    {"592_fri_c4_1000_25", 1000, 25},
    {"593_fri_c1_1000_10", 1000, 10},
    {"594_fri_c2_100_5", 100, 5},
    {"595_fri_c0_1000_10", 1000, 10},
    {"596_fri_c2_250_5", 250, 5},
    {"597_fri_c2_500_5", 500, 5},
    {"598_fri_c0_1000_25", 1000, 25},
    {"599_fri_c2_1000_5", 1000, 5},
    {"601_fri_c1_250_5", 250, 5},
    {"602_fri_c3_250_10", 250, 10},
    {"603_fri_c0_250_50", 250, 50},
    {"604_fri_c4_500_10", 500, 10},
    {"605_fri_c2_250_25", 250, 25},
    {"606_fri_c2_1000_10", 1000, 10},
    {"607_fri_c4_1000_50", 1000, 50},
    {"608_fri_c3_1000_10", 1000, 10},
    {"609_fri_c0_1000_5", 1000, 5},
    {"611_fri_c3_100_5", 100, 5},
    {"612_fri_c1_1000_5", 1000, 5},
    {"613_fri_c3_250_5", 250, 5},
    {"615_fri_c4_250_10", 250, 10},
    {"616_fri_c4_500_50", 500, 50},
    {"617_fri_c3_500_5", 500, 5},
    {"618_fri_c3_1000_50", 1000, 50},
    {"620_fri_c1_1000_25", 1000, 25},
    {"621_fri_c0_100_10", 100, 10},
    {"622_fri_c2_1000_50", 1000, 50},
    {"623_fri_c4_1000_10", 1000, 10},
    {"624_fri_c0_100_5", 100, 5},
    {"626_fri_c2_500_50", 500, 50},
    {"627_fri_c2_500_10", 500, 10},
    {"628_fri_c3_1000_5", 1000, 5},
    {"631_fri_c1_500_5", 500, 5},
    {"633_fri_c0_500_25", 500, 25},
    {"634_fri_c2_100_10", 100, 10},
    {"635_fri_c0_250_10", 250, 10},
    {"637_fri_c1_500_50", 500, 50},
    {"641_fri_c1_500_10", 500, 10},
    {"643_fri_c2_500_25", 500, 25},
    {"644_fri_c4_250_25", 250, 25},
    {"645_fri_c3_500_50", 500, 50},
    {"646_fri_c3_500_10", 500, 10},
    {"647_fri_c1_250_10", 250, 10},
    {"648_fri_c1_250_50", 250, 50},
    {"649_fri_c0_500_5", 500, 5},
    {"650_fri_c0_500_50", 500, 50},
    {"651_fri_c0_100_25", 100, 25},
    {"653_fri_c0_250_25", 250, 25},
    {"654_fri_c0_500_10", 500, 10},
    {"656_fri_c1_100_5", 100, 5},
    {"657_fri_c2_250_10", 250, 10},
    {"658_fri_c3_250_25", 250, 25},
    {"659_sleuth_ex1714", 47, 7},
    {"663_rabe_266", 120, 2},
    {"665_sleuth_case2002", 147, 6},
    {"666_rmftsa_ladata", 508, 10},
    {"678_visualizing_environmental", 111, 3},
    {"679_rmftsa_sleepdata", 1024, 2},
    {"687_sleuth_ex1605", 62, 5},
    {"690_visualizing_galaxy", 323, 4},
    {"695_chatfield_4", 235, 12},
    {"706_sleuth_case1202", 93, 6},
    {"712_chscase_geyser1", 222, 2},
};

constexpr char kUrlBase[] =
    "https://github.com/EpistasisLab/pmlb/raw/master/datasets/";

}  // namespace

const std::vector<DatasetManifest>& catalog() {
  static const std::vector<DatasetManifest> entries = [] {
    std::vector<DatasetManifest> out;
    out.reserve(std::size(kCatalog));
    for (const CatalogRow& row : kCatalog) {
      DatasetManifest m;
      m.name = row.name;
      m.rows = row.rows;
      m.features = row.features;
      m.url = std::string(kUrlBase) + row.name + "/" + row.name + ".tsv.gz";
      out.push_back(std::move(m));
    }
    std::sort(out.begin(), out.end(),
              [](const DatasetManifest& a, const DatasetManifest& b) {
                return a.name < b.name;
              });
    return out;
  }();
  return entries;
}

std::vector<DatasetManifest> corpus(std::int64_t max_rows) {
  std::vector<DatasetManifest> out;
  for (const DatasetManifest& m : catalog()) {
    if (m.rows < max_rows) out.push_back(m);
  }
  return out;
}

const DatasetManifest* find_dataset(const std::string& name) {
  const auto& all = catalog();
  auto it = std::lower_bound(all.begin(), all.end(), name,
                             [](const DatasetManifest& m, const std::string& n) {
                               return m.name < n;
                             });
  if (it == all.end() || it->name != name) return nullptr;
  return &*it;
}

}  // namespace maclab
