// Pure SVG builders for the in-game CPCP sparkline and the dashboard curve.

export function polylinePoints(
  values: number[],
  width: number,
  height: number,
  yMin = 0,
  yMax = 1,
): string {
  if (values.length === 0) return "";
  const span = yMax - yMin || 1;
  const step = values.length > 1 ? width / (values.length - 1) : 0;
  return values
    .map((v, i) => {
      const x = values.length > 1 ? i * step : width / 2;
      const y = height - ((v - yMin) / span) * height;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}

export function sparklineSvg(values: number[], width = 160, height = 36): string {
  const points = polylinePoints(values, width, height);
  return (
    `<svg width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">` +
    `<polyline points="${points}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>` +
    "</svg>"
  );
}

export function curveSvg(
  values: number[],
  references: Array<{ label: string; value: number }>,
  width = 640,
  height = 240,
): string {
  const points = polylinePoints(values, width, height);
  const refs = references
    .map(({ label, value }) => {
      const y = (height - value * height).toFixed(1);
      return (
        `<line x1="0" y1="${y}" x2="${width}" y2="${y}" stroke="#999" stroke-dasharray="5,4"/>` +
        `<text x="${width - 4}" y="${(Number(y) - 4).toFixed(1)}" text-anchor="end" font-size="10" fill="#666">${label}</text>`
      );
    })
    .join("");
  return (
    `<svg width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" data-testid="cpcp-curve">` +
    `<rect width="${width}" height="${height}" fill="#fafafa"/>` +
    refs +
    `<polyline points="${points}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>` +
    "</svg>"
  );
}
