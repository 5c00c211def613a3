/**
 * Image annotations: objects with boxes, relationships linking participants.
 * Noun regions come from object boxes; verb regions from the union of the
 * boxes of every participant (agents and/or objects) in the relationship.
 */

import { Box, boxArea, clipBox, unionBoxes } from "./geometry.js";

export interface AnnotatedObject {
  name: string;
  box: Box;
}

export interface AnnotatedRelationship {
  predicate: string;
  participants: Box[];
}

export interface AnnotatedImage {
  id: string;
  width: number;
  height: number;
  objects: AnnotatedObject[];
  relationships: AnnotatedRelationship[];
}

export interface Roi {
  imageId: string;
  box: Box;
}

export interface RoiResult {
  rois: Roi[];
  skipped: string[]; // log lines for degenerate regions
}

/** Every usable region labelled by the word; degenerate boxes are logged. */
export function roisForWord(images: AnnotatedImage[], word: string, wordType: "noun" | "verb"): RoiResult {
  const needle = word.toLowerCase();
  const rois: Roi[] = [];
  const skipped: string[] = [];
  for (const image of images) {
    const candidates: Box[] = [];
    if (wordType === "noun") {
      for (const obj of image.objects) {
        if (obj.name.toLowerCase() === needle) candidates.push(obj.box);
      }
    } else {
      for (const rel of image.relationships) {
        if (rel.predicate.toLowerCase() === needle && rel.participants.length > 0) {
          candidates.push(unionBoxes(rel.participants));
        }
      }
    }
    for (const raw of candidates) {
      const box = clipBox(raw, image.width, image.height);
      if (boxArea(box) <= 0) {
        skipped.push(`${word}\tdegenerate ROI ${JSON.stringify(raw)} in image ${image.id}`);
      } else {
        rois.push({ imageId: image.id, box });
      }
    }
  }
  return { rois, skipped };
}
