export { SchemaError } from "./errors.js";
export { parseSeriesCsv, type Series } from "./csv.js";
export { readCheckpoint, xNodes, yNodes, type Checkpoint } from "./checkpoint.js";
export { readWeightsJson, type WeightProfileJson } from "./weightsJson.js";
export { encodePng, readPngSize } from "./png.js";
export {
  renderHeatmap,
  renderSeries,
  renderTail,
  renderTauOverlay,
  renderWeight,
  type Figure,
} from "./figures.js";
export { main } from "./cli.js";
