/**
 * Percent formatting for the posterior display.
 *
 * Rounding each probability independently can make the rendered column sum
 * drift from 100.0 by up to 0.05 per row, so the chart uses largest-remainder
 * apportionment at one decimal: the rendered values always sum to exactly
 * what the raw probabilities sum to, rounded to one decimal (100.0 for a
 * normalized posterior).
 */

export function formatPercents(probabilities: number[]): string[] {
  if (probabilities.length === 0) return [];
  const tenths = probabilities.map((p) => p * 1000);
  const floors = tenths.map((t) => Math.floor(t));
  const target = Math.round(tenths.reduce((a, b) => a + b, 0));
  let leftover = target - floors.reduce((a, b) => a + b, 0);

  // hand out the missing tenths to the largest fractional parts first
  const byFraction = tenths
    .map((t, i) => ({ fraction: t - Math.floor(t), i }))
    .sort((a, b) => b.fraction - a.fraction || a.i - b.i);
  for (const { i } of byFraction) {
    if (leftover <= 0) break;
    floors[i] = (floors[i] ?? 0) + 1;
    leftover -= 1;
  }
  // leftover < 0 only when the input already sums above the target; claw
  // back tenths from the smallest fractional parts that can spare one
  for (let k = byFraction.length - 1; k >= 0 && leftover < 0; k -= 1) {
    const { i } = byFraction[k]!;
    if ((floors[i] ?? 0) > 0) {
      floors[i] = (floors[i] ?? 0) - 1;
      leftover += 1;
    }
  }
  return floors.map((t) => `${(t / 10).toFixed(1)}%`);
}

/** Sum of already-rendered percent strings, for sanity checks. */
export function renderedSum(percents: string[]): number {
  return percents.reduce((acc, s) => acc + Number.parseFloat(s), 0);
}
