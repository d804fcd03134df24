import { describe, expect, it } from "vitest";

import { canonicalCoord, formatCoord } from "../src/format";

// [raw, canonical, display] triples produced by the server's quantizer.
// Covers round-half-to-even ties (0.005 -> 0.00 but 0.015 -> 0.02), values
// already at two decimals, sub-epsilon values in exponent notation, and a
// uniform sweep.
const GOLDEN: [number, number, string][] = [
  [0.0, 0.0, "0.00"], [50.0, 50.0, "50.00"], [100.0, 100.0, "100.00"],
  [52.599999, 52.6, "52.60"], [65.2, 65.2, "65.20"], [63.9, 63.9, "63.90"],
  [0.005, 0.0, "0.00"], [0.015, 0.02, "0.02"], [2.675, 2.68, "2.68"],
  [0.615, 0.62, "0.62"], [1.005, 1.0, "1.00"], [50.555, 50.56, "50.56"],
  [99.985, 99.98, "99.98"], [33.333333333, 33.33, "33.33"], [66.666, 66.67, "66.67"],
  [99.994999, 99.99, "99.99"], [1e-7, 0.0, "0.00"], [1.5e-7, 0.0, "0.00"],
  [12.125, 12.12, "12.12"], [12.135, 12.14, "12.14"], [0.004999999, 0.0, "0.00"],
  [87.65432109876, 87.65, "87.65"], [99.9999999999999, 100.0, "100.00"],
  [50.44324023878307, 50.44, "50.44"], [22.66342961625596, 22.66, "22.66"],
  [70.26460880329856, 70.26, "70.26"], [27.0297922542304, 27.03, "27.03"],
  [34.12114396856428, 34.12, "34.12"], [85.68640510642153, 85.69, "85.69"],
  [88.14814653518908, 88.15, "88.15"], [70.26824234505618, 70.27, "70.27"],
  [34.73238344378407, 34.73, "34.73"], [40.341405230888604, 40.34, "40.34"],
  [45.35411313304518, 45.35, "45.35"], [15.57113861891649, 15.57, "15.57"],
  [72.73158201227741, 72.73, "72.73"], [66.34574033916778, 66.35, "66.35"],
  [42.63538271496028, 42.64, "42.64"], [18.410457073469132, 18.41, "18.41"],
  [60.25072461596961, 60.25, "60.25"], [2.5852035316651367, 2.59, "2.59"],
  [56.16540576964306, 56.17, "56.17"], [41.8342494218924, 41.83, "41.83"],
  [66.54477787304505, 66.54, "66.54"], [96.77921043874535, 96.78, "96.78"],
  [57.43575106814848, 57.44, "57.44"], [79.53314362317988, 79.53, "79.53"],
  [16.595852762720774, 16.6, "16.60"], [49.84460692045973, 49.84, "49.84"],
  [90.47507555510059, 90.48, "90.48"], [44.51154115478968, 44.51, "44.51"],
  [38.2831623127598, 38.28, "38.28"], [72.41957039417528, 72.42, "72.42"],
  [52.067974012090076, 52.07, "52.07"], [87.98801318055064, 87.99, "87.99"],
  [81.21595062486352, 81.22, "81.22"], [63.00148120553969, 63.0, "63.00"],
  [13.69570934731934, 13.7, "13.70"], [56.55916080498784, 56.56, "56.56"],
  [94.11355348376004, 94.11, "94.11"], [45.23067426750828, 45.23, "45.23"],
  [9.319476070566212, 9.32, "9.32"], [37.33184227147145, 37.33, "37.33"],
  [7.502330569055027, 7.5, "7.50"], [75.13751033820176, 75.14, "75.14"],
  [80.85575277273533, 80.86, "80.86"], [11.657088948358885, 11.66, "11.66"],
  [41.34422855134679, 41.34, "41.34"], [51.48946556367181, 51.49, "51.49"],
  [79.76508177226533, 79.77, "79.77"], [9.411329880452058, 9.41, "9.41"],
  [2.2460664496250726, 2.25, "2.25"], [75.84225090543744, 75.84, "75.84"],
  [37.808243876620566, 37.81, "37.81"], [64.91251383463742, 64.91, "64.91"],
  [89.78001714099376, 89.78, "89.78"], [11.41854749901241, 11.42, "11.42"],
  [69.45790654174277, 69.46, "69.46"], [90.56745866840043, 90.57, "90.57"],
  [77.05296767991653, 77.05, "77.05"], [18.54903560870459, 18.55, "18.55"],
  [74.31088261097602, 74.31, "74.31"], [35.50632682561818, 35.51, "35.51"],
  [75.02, 75.02, "75.02"], [23.205, 23.2, "23.20"], [4.2, 4.2, "4.20"],
  [38.29, 38.29, "38.29"], [20.33, 20.33, "20.33"], [20.27, 20.27, "20.27"],
  [52.22, 52.22, "52.22"], [47.25, 47.25, "47.25"], [6.44, 6.44, "6.44"],
  [82.33, 82.33, "82.33"], [80.33, 80.33, "80.33"], [58.76, 58.76, "58.76"],
  [3.69, 3.69, "3.69"], [77.39, 77.39, "77.39"], [43.42, 43.42, "43.42"],
  [58.31, 58.31, "58.31"], [58.185, 58.18, "58.18"], [24.87, 24.87, "24.87"],
  [32.0, 32.0, "32.00"], [11.295, 11.3, "11.30"],
];

describe("canonicalCoord", () => {
  it("matches the server's quantizer on the golden table", () => {
    for (const [raw, canonical, display] of GOLDEN) {
      expect(canonicalCoord(raw), `canonicalCoord(${raw})`).toBe(canonical);
      expect(formatCoord(raw), `formatCoord(${raw})`).toBe(display);
    }
  });

  it("is idempotent: a canonical value stays put", () => {
    for (const [, canonical] of GOLDEN) {
      expect(canonicalCoord(canonical)).toBe(canonical);
    }
  });

  it("display and stored value agree both ways", () => {
    for (const [raw] of GOLDEN) {
      const stored = canonicalCoord(raw);
      expect(Number(formatCoord(stored))).toBe(stored);
    }
  });

  it("handles negatives symmetrically", () => {
    expect(canonicalCoord(-2.675)).toBe(-2.68);
    expect(canonicalCoord(-50.555)).toBe(-50.56);
    expect(formatCoord(-12.125)).toBe("-12.12");
  });

  it("rejects non-finite input", () => {
    expect(() => canonicalCoord(Number.NaN)).toThrow(/finite/);
    expect(() => canonicalCoord(Infinity)).toThrow(/finite/);
  });
});
