#include "legalstyle/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "legalstyle/hashing.hpp"
#include "legalstyle/prompts.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

std::uint64_t SeededRng::next() noexcept {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix64(state_);
}

std::size_t SeededRng::below(std::size_t n) noexcept { return n == 0 ? 0 : static_cast<std::size_t>(next() % n); }

double SeededRng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SeededRng::normal() noexcept {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

struct CaseType {
  std::string dispute;
  std::string contract;
  std::string money;
  std::string opening;
  std::vector<std::string> specific;
  std::string articles;
};

const std::vector<CaseType>& case_types() {
  static const std::vector<CaseType> kTypes = {
      {"买卖合同纠纷", "买卖合同", "货款",
       "本院认为，{{A}}与{{B}}之间的买卖合同系双方真实意思表示，内容不违反法律、行政法规的强制性规定，合法有效，双方均应依约履行。",
       {"{{A}}已按约向{{B}}交付货物，{{B}}应当按照约定支付货款。",
        "根据双方于{{date}}签订的对账单，{{B}}尚欠货款{{amt}}元，对此{{B}}当庭表示无异议，本院予以确认。",
        "{{B}}辩称货物存在质量问题，但未在约定的检验期内提出，亦未提交相应证据，本院不予采信。"},
       "第五百零九条、第五百七十七条、第六百二十六条"},
      {"民间借贷纠纷", "借条", "借款",
       "本院认为，合法的借贷受法律保护，借款人应当按照约定的期限返还借款。",
       {"{{B}}于{{date}}向{{A}}借款{{amt}}元，有借条及银行转账凭证为证，借贷事实清楚，本院予以确认。",
        "{{B}}未按约定期限归还借款，应当承担偿还借款本金并支付利息的责任。",
        "关于利息，双方约定年利率{{rate}}%，未超过合同成立时一年期贷款市场报价利率的四倍，于法有据，本院予以支持。",
        "{{C}}在借条上以保证人身份签字，应当对上述债务承担连带清偿责任。"},
       "第六百六十七条、第六百七十四条、第六百七十五条"},
      {"房屋租赁合同纠纷", "房屋租赁合同", "租金",
       "本院认为，{{A}}与{{B}}签订的房屋租赁合同系双方真实意思表示，合法有效，双方均应按照约定履行义务。",
       {"{{B}}自{{date}}起逾期未支付租金，经{{A}}催告后在合理期限内仍未支付，{{A}}据此主张解除合同，于法有据，本院予以支持。",
        "{{B}}应当向{{A}}支付拖欠的租金{{amt}}元。",
        "关于房屋占有使用费，本院酌情按照原租金标准计算至{{B}}实际腾退房屋之日。",
        "{{B}}辩称房屋存在漏水问题影响使用，但其提交的证据不足以证明上述主张，本院不予采信。"},
       "第七百零三条、第七百二十二条、第五百七十七条"},
      {"服务合同纠纷", "服务合同", "服务费",
       "本院认为，{{A}}与{{B}}之间的服务合同系双方真实意思表示，不违反法律、行政法规的强制性规定，应属有效。",
       {"{{A}}已依约完成服务内容，{{B}}在验收单上签字确认，应当支付相应的服务费。",
        "经核算，{{B}}尚欠服务费{{amt}}元，{{B}}对此金额无异议，本院予以确认。",
        "{{B}}辩称{{A}}提供的服务未达到约定标准，但未提交证据予以证明，本院不予采信。"},
       "第四百六十五条、第五百零九条、第五百七十七条"},
  };
  return kTypes;
}

const std::vector<std::string> kGeneric = {
    "上述事实，有{{contract}}、付款凭证及当事人陈述等证据在案佐证，本院予以确认。",
    "{{B}}逾期未支付{{money}}，已构成违约，应当承担继续履行及赔偿损失等违约责任。",
    "{{B}}辩称其已履行部分付款义务，但未提交证据予以证明，该抗辩意见缺乏事实依据，本院不予采信。",
    "{{A}}主张的律师费{{fee}}元，双方在合同中并未约定由违约方承担，于法无据，本院不予支持。",
    "关于逾期付款损失，{{A}}主张自{{date2}}起按照全国银行间同业拆借中心公布的一年期贷款市场报价利率计算，于法有据，本院予以支持。",
    "{{B}}主张违约金过高，本院综合考虑合同履行情况及{{A}}的实际损失，酌情调整为{{pen}}元。",
    "据此，{{B}}应向{{A}}支付{{money}}{{amt}}元。",
};

const std::vector<std::string> kClosings = {
    "综上所述，{{A}}的诉讼请求部分成立，本院依法予以支持。",
    "故对{{A}}要求{{B}}支付{{money}}的诉讼请求，本院予以支持。",
};

const std::vector<std::string> kSurnames = {"张", "王", "李", "赵", "刘", "陈", "杨", "黄", "周", "吴",
                                            "孙", "马", "朱", "胡", "郭", "何", "林", "罗", "高", "梁"};
const std::vector<std::string> kCities = {"杭州", "南京", "深圳", "成都", "武汉", "济南", "苏州", "宁波"};
const std::vector<std::string> kBrands = {"恒达", "宏远", "鑫源", "华泰", "佳和", "盛通", "瑞丰", "新创", "博远", "明辉"};
const std::vector<std::string> kIndustries = {"贸易", "科技", "建材", "物流", "商贸", "电子"};

struct Court {
  std::string province;
  std::string city;
  std::string district;
  std::string code;
};

const std::vector<Court> kCourts = {
    {"浙江省", "杭州市", "西湖区", "浙0106"}, {"江苏省", "南京市", "鼓楼区", "苏0106"},
    {"广东省", "深圳市", "南山区", "粤0305"}, {"四川省", "成都市", "武侯区", "川0107"},
    {"湖北省", "武汉市", "洪山区", "鄂0111"}, {"山东省", "济南市", "历下区", "鲁0102"},
};

template <typename T>
const T& pick(SeededRng& rng, const std::vector<T>& v) {
  return v[rng.below(v.size())];
}

std::string person(SeededRng& rng) { return pick(rng, kSurnames) + (rng.below(3) == 0 ? "某某" : "某"); }

std::string company(SeededRng& rng) {
  return pick(rng, kCities) + pick(rng, kBrands) + pick(rng, kIndustries) + "有限公司";
}

std::string date(SeededRng& rng, int year) {
  return std::to_string(year) + "年" + std::to_string(1 + rng.below(12)) + "月" + std::to_string(1 + rng.below(28)) + "日";
}

std::string cn_digit_date(int year, int month, int day) {
  static const std::vector<std::string> kDigits = {"〇", "一", "二", "三", "四", "五", "六", "七", "八", "九"};
  static const std::vector<std::string> kSmall = {"",     "一",   "二",   "三",   "四",   "五",   "六",   "七",
                                                  "八",   "九",   "十",   "十一", "十二", "十三", "十四", "十五",
                                                  "十六", "十七", "十八", "十九", "二十", "二十一", "二十二",
                                                  "二十三", "二十四", "二十五", "二十六", "二十七", "二十八"};
  std::string y;
  for (char c : std::to_string(year)) y += kDigits[static_cast<std::size_t>(c - '0')];
  return y + "年" + kSmall[static_cast<std::size_t>(month)] + "月" + kSmall[static_cast<std::size_t>(day)] + "日";
}

std::string amount(SeededRng& rng, std::size_t lo, std::size_t hi, std::size_t step) {
  return std::to_string(lo + step * rng.below((hi - lo) / step + 1));
}

CorpusRecord make_document(const std::string& id, SeededRng& rng) {
  const auto& type = pick(rng, case_types());
  const auto& court = pick(rng, kCourts);
  const int year = 2019 + static_cast<int>(rng.below(5));
  std::map<std::string, std::string> v{
      {"A", rng.below(2) == 0 ? person(rng) : company(rng)},
      {"B", rng.below(2) == 0 ? person(rng) : company(rng)},
      {"C", person(rng)},
      {"amt", amount(rng, 10000, 500000, 100)},
      {"fee", amount(rng, 3000, 20000, 500)},
      {"pen", amount(rng, 1000, 30000, 100)},
      {"date", date(rng, year - 1)},
      {"date2", date(rng, year)},
      {"rate", pick(rng, std::vector<std::string>{"3.85", "4.35", "6", "8", "10"})},
      {"contract", type.contract},
      {"money", type.money},
  };
  if (v["A"] == v["B"]) v["B"] = company(rng) + "分公司";

  std::vector<std::string> body = type.specific;
  std::vector<std::string> generic = kGeneric;
  for (std::size_t i = generic.size(); i > 1; --i) std::swap(generic[i - 1], generic[rng.below(i)]);
  generic.resize(2 + rng.below(3));
  body.insert(body.end(), generic.begin(), generic.end());
  for (std::size_t i = body.size(); i > 1; --i) std::swap(body[i - 1], body[rng.below(i)]);

  std::string reasoning = render_template(type.opening, v);
  for (const auto& s : body) reasoning += render_template(s, v);
  reasoning += render_template(pick(rng, kClosings), v);

  const auto& a = v["A"];
  const auto& b = v["B"];
  std::string header = court.city + court.district + "人民法院\n民事判决书\n（" + std::to_string(year) + "）" +
                       court.code + "民初" + std::to_string(1000 + rng.below(9000)) + "号\n原告：" + a + "。\n被告：" +
                       b + "。\n原告" + a + "与被告" + b + type.dispute + "一案，本院于" + date(rng, year) +
                       "立案后，依法适用简易程序，公开开庭进行了审理。本案现已审理终结。\n";
  std::string facts = a + "向本院提出诉讼请求：1.判令" + b + "支付" + type.money + v["amt"] + "元；2.本案诉讼费用由" + b +
                      "负担。事实和理由：双方签订" + type.contract + "后，" + b + "未按约定支付" + type.money + "，经多次催要未果。" +
                      b + "辩称，其并非拒绝付款，只是资金周转困难，请求法院依法处理。经审理查明，双方签订" + type.contract +
                      "的事实清楚，" + b + "至今未支付" + type.money + v["amt"] + "元。\n";
  std::string judgment = "依照《中华人民共和国民法典》" + type.articles +
                         "，《中华人民共和国民事诉讼法》第六十七条之规定，判决如下：\n一、被告" + b +
                         "于本判决生效之日起十日内向原告" + a + "支付" + type.money + v["amt"] + "元；\n二、驳回原告" + a +
                         "的其他诉讼请求。\n案件受理费" + amount(rng, 100, 5000, 10) + "元，由被告" + b + "负担。\n";
  std::string footer = "如不服本判决，可以在判决书送达之日起十五日内，向本院递交上诉状，并按对方当事人的人数提出副本，上诉于" +
                       court.province + court.city + "中级人民法院。\n审判员　" + person(rng) + "\n" +
                       cn_digit_date(year, 1 + static_cast<int>(rng.below(12)), 1 + static_cast<int>(rng.below(28))) +
                       "\n书记员　" + person(rng) + "\n";
  return CorpusRecord{id, header + facts + reasoning + "\n" + judgment + footer};
}

std::size_t count_hits(std::string_view text, const Lexicon& lexicon) {
  std::size_t hits = 0;
  for (const auto& phrase : lexicon.phrases) {
    if (utf8::length(phrase) < 2) continue;
    for (auto pos = text.find(phrase); pos != std::string_view::npos; pos = text.find(phrase, pos + phrase.size())) {
      ++hits;
    }
  }
  return hits;
}

}  // namespace

std::vector<CorpusRecord> generate_corpus(std::size_t count, std::uint64_t seed, const std::string& prefix) {
  std::vector<CorpusRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SeededRng rng(mix64(seed ^ mix64(i + 1)));
    out.push_back(make_document(prefix + "-" + std::to_string(seed) + "-" + std::to_string(i), rng));
  }
  return out;
}

std::vector<HumanRating> simulate_ratings(const std::vector<RatedText>& texts, std::size_t raters, std::uint64_t seed,
                                          const Lexicon& formulaic) {
  std::vector<double> rater_bias(raters);
  for (std::size_t r = 0; r < raters; ++r) {
    SeededRng rng(mix64(seed ^ mix64(0xA11CE + r)));
    rater_bias[r] = 0.3 * rng.normal();
  }
  std::vector<HumanRating> out;
  for (const auto& t : texts) {
    const auto ref = t.reference.empty() ? t.text : t.reference;
    const double ref_hits = static_cast<double>(std::max<std::size_t>(1, count_hits(ref, formulaic)));
    const double ratio = std::min(1.0, static_cast<double>(count_hits(t.text, formulaic)) / ref_hits);
    const double latent = 3.0 + 6.0 * ratio;
    SeededRng rng(mix64(seed ^ fnv1a64(t.id)));
    std::array<double, 7> dim_offset{};
    for (auto& o : dim_offset) o = 0.6 * rng.normal();
    for (std::size_t r = 0; r < raters; ++r) {
      for (std::size_t d = 0; d < kDimensions.size(); ++d) {
        const double raw = latent + dim_offset[d] + rater_bias[r] + 0.7 * rng.normal();
        out.push_back(HumanRating{t.id, "R" + std::to_string(r + 1), kDimensions[d],
                                  std::clamp(std::round(raw), 0.0, 10.0)});
      }
    }
  }
  return out;
}

}  // namespace legalstyle
