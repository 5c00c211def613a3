/** Axis-aligned boxes in corner form [x1, y1, x2, y2]. */

export type Box = [number, number, number, number];

export function unionBoxes(boxes: Box[]): Box {
  if (boxes.length === 0) {
    throw new Error("cannot union zero boxes");
  }
  let [x1, y1, x2, y2] = boxes[0];
  for (const [a, b, c, d] of boxes.slice(1)) {
    x1 = Math.min(x1, a);
    y1 = Math.min(y1, b);
    x2 = Math.max(x2, c);
    y2 = Math.max(y2, d);
  }
  return [x1, y1, x2, y2];
}

export function boxArea(box: Box): number {
  const [x1, y1, x2, y2] = box;
  return Math.max(0, x2 - x1) * Math.max(0, y2 - y1);
}

/** Clip a box to image bounds; degenerate results keep zero area. */
export function clipBox(box: Box, width: number, height: number): Box {
  const [x1, y1, x2, y2] = box;
  return [
    Math.min(Math.max(x1, 0), width),
    Math.min(Math.max(y1, 0), height),
    Math.min(Math.max(x2, 0), width),
    Math.min(Math.max(y2, 0), height),
  ];
}
